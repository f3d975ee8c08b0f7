#pragma once

#include "erqc/core.hpp"

namespace erqc {

/// A quality ratio. `degenerate` is set when the denominator was empty and the
/// value fell back to the 1.0 convention.
struct Ratio {
  double value = 1.0;
  bool degenerate = false;
};

Ratio precision(const Workload& workload, const LabelAssignment& labels);
Ratio recall(const Workload& workload, const LabelAssignment& labels);

// Lower bound on achieved precision given match-count bounds for D+ and DH.
Ratio precision_lower_bound(double n_plus, double n_human, double matches_plus_lb,
                            double matches_human);

// Lower bound on achieved recall given a lower bound on matches above D- and an
// upper bound on matches left in D-.
Ratio recall_lower_bound(double matches_plus_lb, double matches_human, double matches_minus_ub);

/// Fraction of match labels among the pairs in `range`; every pair must be labeled.
double observed_proportion(const Workload& workload, const LabelAssignment& labels,
                           PairRange range);

}  // namespace erqc
