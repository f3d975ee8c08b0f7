#include "erqc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "erqc/errors.hpp"
#include "erqc/random.hpp"

namespace erqc {

double logistic_proportion(double v, double tau) {
  return 0.95 / (1.0 + std::exp(-tau * (v - 0.55)));
}

void SyntheticSpec::validate() const {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (subset_size == 0) throw ConfigError("subset size must be positive");
  if (n_pairs < subset_size) throw ConfigError("n_pairs must be at least the subset size");
}

Workload generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_pairs;
  std::vector<double> metric(n);
  {
    std::mt19937_64 rng(derive_seed(spec.seed, 0));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : metric) v = u(rng);
  }
  std::sort(metric.begin(), metric.end());

  const std::size_t width = std::to_string(n - 1).size();
  std::vector<InstancePair> pairs(n);
  for (std::size_t first = 0, subset = 0; first < n; first += spec.subset_size, ++subset) {
    const std::size_t last = std::min(n, first + spec.subset_size);
    double mean = 0.0;
    for (std::size_t i = first; i < last; ++i) mean += metric[i];
    mean /= static_cast<double>(last - first);

    std::mt19937_64 rng(derive_seed(spec.seed, subset + 1));
    const double p = logistic_proportion(mean, spec.tau);
    double r = p;
    if (spec.sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, spec.sigma * std::sqrt(p * (1.0 - p)));
      r = std::clamp(p + noise(rng), 0.0, 1.0);
    }
    std::bernoulli_distribution truth(r);
    for (std::size_t i = first; i < last; ++i) {
      std::string id = std::to_string(i);
      id.insert(0, width - id.size(), '0');
      pairs[i] = {"p" + id, metric[i], truth(rng) ? Label::match : Label::unmatch};
    }
  }
  return Workload(std::move(pairs), spec.subset_size);
}

}  // namespace erqc
