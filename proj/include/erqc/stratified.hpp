#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "erqc/core.hpp"
#include "erqc/label_source.hpp"

namespace erqc {

struct StratumSample {
  std::size_t subset = 0;
  std::size_t population = 0;   // n_i
  std::size_t sample_size = 0;  // k_i
  std::size_t matches = 0;

  double proportion() const {
    return sample_size > 0 ? static_cast<double>(matches) / static_cast<double>(sample_size) : 0.0;
  }
};

struct CountInterval {
  double lower = 0.0;
  double upper = 0.0;
  double confidence = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Deterministic per-subset seed derived from a run seed.
std::uint64_t subset_seed(std::uint64_t seed, std::size_t subset);

/// Draws k distinct pairs of `subset` uniformly without replacement and labels
/// them through `source`.
StratumSample draw_sample(const Workload& workload, std::size_t subset, std::size_t k,
                          std::uint64_t seed, LabelSource& source);

/// Stratified estimate of the match proportion of the union of the sampled
/// strata, with finite-population correction.
MeanStd stratified_mean_std(std::span<const StratumSample> samples);

// Two-sided Student t critical value: P(-t < T < t) = theta. Non-finite dof
// gives the normal value. theta is capped at 0.9999.
double t_quantile(double theta, double dof);
double normal_quantile(double theta);

// Degrees of freedom used for a union: sum of sample sizes minus strata, at least 1.
double stratified_dof(std::span<const StratumSample> samples);

CountInterval count_interval(std::span<const StratumSample> samples, double theta);

// Per-bound confidence so that two independent bounds hold jointly with theta.
double split_confidence(double theta);

/// O(1) count intervals over any contiguous run of subsets, every subset sampled.
class StratifiedCounter {
 public:
  StratifiedCounter(std::vector<StratumSample> samples, double confidence);

  std::size_t subset_count() const noexcept { return samples_.size(); }
  // Match-count interval for subsets [first, last_exclusive).
  CountInterval interval(std::size_t first, std::size_t last_exclusive) const;

 private:
  std::vector<StratumSample> samples_;
  double confidence_;
  std::vector<double> count_prefix_;     // sum n_i r_i
  std::vector<double> variance_prefix_;  // sum n_i^2 (1 - f_i) s_i^2 / k_i
  std::vector<double> size_prefix_;
  std::vector<double> dof_prefix_;
  mutable std::vector<double> t_cache_;
};

}  // namespace erqc
