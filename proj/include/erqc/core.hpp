#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace erqc {

enum class Label : std::uint8_t { unmatch = 0, match = 1 };
enum class LabelOrigin : std::uint8_t { machine, human };

std::string_view to_string(Label label);
std::string_view to_string(LabelOrigin origin);
std::optional<Label> parse_label(std::string_view text);

struct InstancePair {
  std::string id;
  double metric = 0.0;
  std::optional<Label> truth;
};

// Half-open range of pair positions in a metric-sorted workload.
struct PairRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return begin == end; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
};

/// Instance pairs sorted ascending by metric (ties broken by id) and cut into
/// contiguous unit subsets of `subset_size` pairs; only the last subset may be
/// shorter. Immutable after construction.
class Workload {
 public:
  static constexpr std::size_t kDefaultSubsetSize = 200;

  explicit Workload(std::vector<InstancePair> pairs,
                    std::size_t subset_size = kDefaultSubsetSize);

  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const std::vector<InstancePair>& pairs() const noexcept { return pairs_; }
  const InstancePair& pair(std::size_t i) const { return pairs_.at(i); }
  std::optional<std::size_t> index_of(std::string_view id) const;

  std::size_t subset_size() const noexcept { return subset_size_; }
  std::size_t subset_count() const noexcept { return subset_means_.size(); }
  PairRange subset(std::size_t k) const;
  // Pairs covered by subsets [first, last_exclusive).
  PairRange subsets(std::size_t first, std::size_t last_exclusive) const;
  std::size_t subset_of(std::size_t pair_index) const { return pair_index / subset_size_; }
  double subset_mean_metric(std::size_t k) const { return subset_means_.at(k); }
  const std::vector<double>& subset_mean_metrics() const noexcept { return subset_means_; }

  bool has_truth() const noexcept { return all_truth_; }
  // Number of true matches in a pair range; throws if any truth is missing.
  std::size_t true_matches(PairRange range) const;
  std::size_t true_matches() const { return true_matches({0, size()}); }

 private:
  std::vector<InstancePair> pairs_;
  std::size_t subset_size_;
  std::vector<double> subset_means_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> match_prefix_;
  bool all_truth_ = true;
};

struct QualityRequirement {
  double alpha = 0.9;  // precision
  double beta = 0.9;   // recall
  double theta = 0.9;  // confidence

  void validate() const;
};

/// Per-pair labels and where they came from, indexed by workload position.
class LabelAssignment {
 public:
  LabelAssignment() = default;
  explicit LabelAssignment(std::size_t pair_count)
      : labels_(pair_count), origins_(pair_count, LabelOrigin::machine) {}

  std::size_t size() const noexcept { return labels_.size(); }
  void set(std::size_t i, Label label, LabelOrigin origin);
  std::optional<Label> label(std::size_t i) const { return labels_.at(i); }
  LabelOrigin origin(std::size_t i) const { return origins_.at(i); }
  bool complete() const;

 private:
  std::vector<std::optional<Label>> labels_;
  std::vector<LabelOrigin> origins_;
};

/// Split of the subsets into D- | DH | D+. DH is the half-open subset range
/// [human_begin, human_end); an empty DH still marks the D-/D+ boundary.
class Partition {
 public:
  Partition() = default;
  Partition(std::size_t human_begin, std::size_t human_end, std::size_t subset_count);

  static Partition all_human(std::size_t subset_count) { return {0, subset_count, subset_count}; }

  std::size_t human_begin() const noexcept { return begin_; }
  std::size_t human_end() const noexcept { return end_; }
  std::size_t subset_count() const noexcept { return count_; }
  bool human_empty() const noexcept { return begin_ == end_; }
  bool all_human() const noexcept { return begin_ == 0 && end_ == count_; }

  std::optional<std::size_t> lower_subset() const;
  std::optional<std::size_t> upper_subset() const;

  PairRange minus_pairs(const Workload& w) const { return w.subsets(0, begin_); }
  PairRange human_pairs(const Workload& w) const { return w.subsets(begin_, end_); }
  PairRange plus_pairs(const Workload& w) const { return w.subsets(end_, count_); }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
  std::size_t count_ = 0;
};

enum class SolverKind : std::uint8_t { base, all_sampling, partial_sampling, hybrid };

std::string_view to_string(SolverKind kind);
std::optional<SolverKind> parse_solver(std::string_view text);

enum class BoundProvenance : std::uint8_t { exact, monotonicity, sampling, gaussian_process };

std::string_view to_string(BoundProvenance p);

/// Certified match-count bounds at the moment a solver stopped.
struct BoundEstimates {
  double matches_plus_lb = 0.0;
  double matches_minus_ub = 0.0;
  double matches_human = 0.0;
  BoundProvenance plus_provenance = BoundProvenance::exact;
  BoundProvenance minus_provenance = BoundProvenance::exact;
};

struct Solution {
  SolverKind solver = SolverKind::base;
  Partition partition;
  std::vector<std::size_t> human_labeled;  // sorted pair positions
  LabelAssignment labels;
  BoundEstimates bounds;
  bool exhausted = false;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t human_cost() const noexcept { return human_labeled.size(); }
};

}  // namespace erqc
