#include "erqc/core.hpp"

#include <algorithm>
#include <cmath>

#include "erqc/errors.hpp"

namespace erqc {

std::string_view to_string(Label label) { return label == Label::match ? "match" : "unmatch"; }

std::string_view to_string(LabelOrigin origin) {
  return origin == LabelOrigin::human ? "human" : "machine";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "1" || text == "match" || text == "true") return Label::match;
  if (text == "0" || text == "unmatch" || text == "false") return Label::unmatch;
  return std::nullopt;
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::base: return "base";
    case SolverKind::all_sampling: return "all_sampling";
    case SolverKind::partial_sampling: return "partial_sampling";
    case SolverKind::hybrid: return "hybrid";
  }
  return "unknown";
}

std::optional<SolverKind> parse_solver(std::string_view text) {
  if (text == "base") return SolverKind::base;
  if (text == "all" || text == "all_sampling") return SolverKind::all_sampling;
  if (text == "samp" || text == "partial" || text == "partial_sampling") {
    return SolverKind::partial_sampling;
  }
  if (text == "hybr" || text == "hybrid") return SolverKind::hybrid;
  return std::nullopt;
}

std::string_view to_string(BoundProvenance p) {
  switch (p) {
    case BoundProvenance::exact: return "exact";
    case BoundProvenance::monotonicity: return "monotonicity";
    case BoundProvenance::sampling: return "sampling";
    case BoundProvenance::gaussian_process: return "gaussian_process";
  }
  return "unknown";
}

Workload::Workload(std::vector<InstancePair> pairs, std::size_t subset_size)
    : pairs_(std::move(pairs)), subset_size_(subset_size) {
  if (subset_size_ == 0) throw ConfigError("subset size must be positive");
  for (const auto& p : pairs_) {
    if (!(p.metric >= 0.0 && p.metric <= 1.0)) {
      throw ContractViolation("pair '" + p.id + "' has metric outside [0,1]");
    }
    if (!p.truth) all_truth_ = false;
  }
  std::sort(pairs_.begin(), pairs_.end(), [](const InstancePair& a, const InstancePair& b) {
    if (a.metric != b.metric) return a.metric < b.metric;
    return a.id < b.id;
  });

  index_.reserve(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (!index_.emplace(pairs_[i].id, i).second) {
      throw ContractViolation("duplicate pair id '" + pairs_[i].id + "'");
    }
  }

  const std::size_t m = (pairs_.size() + subset_size_ - 1) / subset_size_;
  subset_means_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const PairRange r = subset(k);
    double sum = 0.0;
    for (std::size_t i = r.begin; i < r.end; ++i) sum += pairs_[i].metric;
    subset_means_[k] = sum / static_cast<double>(r.size());
  }

  if (all_truth_) {
    match_prefix_.resize(pairs_.size() + 1, 0);
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      match_prefix_[i + 1] = match_prefix_[i] + (*pairs_[i].truth == Label::match ? 1 : 0);
    }
  }
}

std::optional<std::size_t> Workload::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PairRange Workload::subset(std::size_t k) const {
  if (k >= subset_count()) throw ContractViolation("subset index out of range");
  return {k * subset_size_, std::min(pairs_.size(), (k + 1) * subset_size_)};
}

PairRange Workload::subsets(std::size_t first, std::size_t last_exclusive) const {
  if (first > last_exclusive || last_exclusive > subset_count()) {
    throw ContractViolation("subset range out of bounds");
  }
  return {std::min(pairs_.size(), first * subset_size_),
          std::min(pairs_.size(), last_exclusive * subset_size_)};
}

std::size_t Workload::true_matches(PairRange range) const {
  if (range.end > pairs_.size()) throw ContractViolation("pair range out of bounds");
  if (!all_truth_) {
    for (std::size_t i = range.begin; i < range.end; ++i) {
      if (!pairs_[i].truth) throw ContractViolation("pair '" + pairs_[i].id + "' has no ground truth");
    }
  }
  return match_prefix_[range.end] - match_prefix_[range.begin];
}

void QualityRequirement::validate() const {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(alpha)) throw ConfigError("alpha must lie in [0,1]");
  if (!in_unit(beta)) throw ConfigError("beta must lie in [0,1]");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0,1)");
}

void LabelAssignment::set(std::size_t i, Label label, LabelOrigin origin) {
  labels_.at(i) = label;
  origins_.at(i) = origin;
}

bool LabelAssignment::complete() const {
  return std::all_of(labels_.begin(), labels_.end(), [](const auto& l) { return l.has_value(); });
}

Partition::Partition(std::size_t human_begin, std::size_t human_end, std::size_t subset_count)
    : begin_(human_begin), end_(human_end), count_(subset_count) {
  if (begin_ > end_ || end_ > count_) throw ContractViolation("invalid partition bounds");
}

std::optional<std::size_t> Partition::lower_subset() const {
  if (human_empty()) return std::nullopt;
  return begin_;
}

std::optional<std::size_t> Partition::upper_subset() const {
  if (human_empty()) return std::nullopt;
  return end_ - 1;
}

}  // namespace erqc
