#pragma once

#include <cstddef>
#include <cstdint>

#include "erqc/core.hpp"

namespace erqc {

// 0.95 / (1 + exp(-tau (v - 0.55)))
double logistic_proportion(double v, double tau);

struct SyntheticSpec {
  std::size_t n_pairs = 100000;
  std::size_t subset_size = Workload::kDefaultSubsetSize;
  double tau = 14.0;
  double sigma = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Uniform metrics; each subset draws r_i = clamp(p(v_i) + e_i) with
/// e_i ~ N(0, sigma^2 p(1-p)) and every pair's truth ~ Bernoulli(r_i).
Workload generate(const SyntheticSpec& spec);

}  // namespace erqc
