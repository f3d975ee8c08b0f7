#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "erqc/core.hpp"
#include "erqc/gp.hpp"
#include "erqc/label_source.hpp"
#include "erqc/proportion.hpp"
#include "erqc/stratified.hpp"

namespace erqc {

struct SolverConfig {
  QualityRequirement requirement;
  // Starting boundary for BASE. Subset index wins over metric; neither means the median pair.
  std::optional<std::size_t> initial_subset;
  std::optional<double> initial_metric;
  std::size_t base_window = 5;
  double sample_low = 0.01;
  double sample_high = 0.05;
  double epsilon = 0.05;
  std::size_t sample_size = 20;
  gp::Hyperparameters<double> kernel;
  std::optional<double> noise_variance;
  gp::HyperPolicy hyper = gp::HyperPolicy::fixed;
  std::uint64_t seed = 0;

  void validate() const;
  SamplingPolicy sampling_policy() const;
};

// Largest proportion the upper window may fall to and still certify precision. nullopt when D+ is empty.
std::optional<double> base_precision_threshold(double alpha, double n_plus, double n_human,
                                               double human_proportion);

// Threshold the lower window's proportion must not exceed. nullopt when D- is
// empty; +inf when beta is 0.
std::optional<double> base_recall_threshold(double beta, double n_minus, double n_human,
                                            double human_proportion, double n_plus,
                                            double plus_window_proportion);

std::size_t initial_boundary_subset(const Workload& workload, const SolverConfig& config);

// Match-count interval over subsets [first, last_exclusive).
using RangeInterval = std::function<CountInterval(std::size_t, std::size_t)>;

/// Smallest D_H = subsets [i, j] whose recall and precision lower bounds, both
/// computed from `interval`, meet the requirement. Considers every i up to
/// the last one of the leading run satisfying recall and, for each, scans j
/// down from m-1 while precision holds. Ties go to the larger i.
Partition optimal_bounds(const Workload& workload, const QualityRequirement& requirement,
                         const RangeInterval& interval);

Solution base_search(const Workload& workload, const SolverConfig& config, LabelSource& source);
Solution all_sampling_search(const Workload& workload, const SolverConfig& config,
                             LabelSource& source);
Solution partial_sampling_search(const Workload& workload, const SolverConfig& config,
                                 LabelSource& source);
Solution hybrid_search(const Workload& workload, const SolverConfig& config, LabelSource& source);

Solution solve(SolverKind kind, const Workload& workload, const SolverConfig& config,
               LabelSource& source);

}  // namespace erqc
