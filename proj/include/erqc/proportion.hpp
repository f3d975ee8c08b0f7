#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "erqc/core.hpp"
#include "erqc/gp.hpp"
#include "erqc/label_source.hpp"
#include "erqc/stratified.hpp"

namespace erqc {

struct SamplingPolicy {
  double p_low = 0.01;
  double p_high = 0.05;
  double epsilon = 0.05;
  std::size_t sample_size = 20;  // per subset, capped at n_i
  std::uint64_t seed = 0;
  gp::Hyperparameters<double> kernel;
  // Unset: mean of r(1-r)/k over the training subsets.
  std::optional<double> noise_variance;
  gp::HyperPolicy hyper = gp::HyperPolicy::fixed;

  void validate() const;
};

struct ProportionFit {
  gp::Model<double> model;
  std::vector<StratumSample> samples;  // ascending by subset
  std::size_t initial_count = 0;
  std::size_t budget = 0;
};

std::size_t initial_sample_count(std::size_t subset_count, double p_low);
std::size_t sample_budget(std::size_t subset_count, double p_high);

// ceil(m p_l) subsets spread evenly over [0, m-1], both ends included.
std::vector<std::size_t> equidistant_subsets(std::size_t subset_count, std::size_t count);

double sampling_noise_variance(const std::vector<StratumSample>& samples);

/// Fits a GP to the samples as they stand (inputs are subset mean metrics).
gp::Model<double> fit_samples(const Workload& workload, const std::vector<StratumSample>& samples,
                              const SamplingPolicy& policy);

/// Adaptive training loop: sample equidistant subsets, then bisect gaps whose
/// midpoint the current model misses by at least epsilon, until the queue
/// drains or the budget ceil(m p_u) is spent.
ProportionFit fit_proportion_function(const Workload& workload, const SamplingPolicy& policy,
                                      LabelSource& source);

// JSON dump of inputs, targets and hyperparameters.
std::string model_json(const gp::Model<double>& model);

}  // namespace erqc
