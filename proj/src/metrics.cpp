#include "erqc/metrics.hpp"

#include "erqc/errors.hpp"

namespace erqc {
namespace {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

Confusion confusion(const Workload& workload, const LabelAssignment& labels) {
  if (labels.size() != workload.size()) {
    throw ContractViolation("label assignment does not cover the workload");
  }
  Confusion c;
  for (std::size_t i = 0; i < workload.size(); ++i) {
    const auto& pair = workload.pair(i);
    if (!pair.truth) throw ContractViolation("pair '" + pair.id + "' has no ground truth");
    const auto label = labels.label(i);
    if (!label) throw ContractViolation("pair '" + pair.id + "' has no label");
    const bool truly = *pair.truth == Label::match;
    const bool said = *label == Label::match;
    if (truly && said) ++c.tp;
    else if (!truly && said) ++c.fp;
    else if (truly && !said) ++c.fn;
  }
  return c;
}

Ratio ratio(double num, double den) {
  if (den <= 0.0) return {1.0, true};
  return {num / den, false};
}

}  // namespace

Ratio precision(const Workload& workload, const LabelAssignment& labels) {
  const Confusion c = confusion(workload, labels);
  return ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
}

Ratio recall(const Workload& workload, const LabelAssignment& labels) {
  const Confusion c = confusion(workload, labels);
  return ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
}

Ratio precision_lower_bound(double n_plus, double n_human, double matches_plus_lb,
                            double matches_human) {
  if (matches_plus_lb > n_plus || matches_human > n_human || matches_plus_lb < 0.0 ||
      matches_human < 0.0) {
    throw ContractViolation("match counts exceed their populations");
  }
  return ratio(matches_plus_lb + matches_human, n_plus + n_human);
}

Ratio recall_lower_bound(double matches_plus_lb, double matches_human, double matches_minus_ub) {
  if (matches_plus_lb < 0.0 || matches_human < 0.0 || matches_minus_ub < 0.0) {
    throw ContractViolation("match counts must be non-negative");
  }
  const double found = matches_plus_lb + matches_human;
  return ratio(found, found + matches_minus_ub);
}

double observed_proportion(const Workload& workload, const LabelAssignment& labels,
                           PairRange range) {
  if (range.empty()) throw ContractViolation("observed proportion of an empty range");
  if (range.end > workload.size() || labels.size() != workload.size()) {
    throw ContractViolation("range outside the labeled workload");
  }
  std::size_t matches = 0;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    const auto label = labels.label(i);
    if (!label) throw ContractViolation("pair '" + workload.pair(i).id + "' has no label");
    if (*label == Label::match) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(range.size());
}

}  // namespace erqc
