#include "erqc/stratified.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "erqc/errors.hpp"
#include "erqc/random.hpp"

namespace erqc {
namespace {

constexpr double kMaxConfidence = 0.9999;

double capped(double theta) {
  if (!(theta > 0.0 && theta < 1.0 + 1e-12)) throw ContractViolation("confidence must lie in (0,1)");
  return std::min(theta, kMaxConfidence);
}

// n_i^2 (1 - k_i/n_i) s_i^2 / k_i; zero for a census.
double stratum_variance_term(const StratumSample& s) {
  if (s.sample_size > s.population || s.matches > s.sample_size) {
    throw ContractViolation("stratum sample counts are inconsistent");
  }
  if (s.sample_size == s.population) return 0.0;
  if (s.sample_size < 2) throw ContractViolation("stratum needs at least two samples for a variance");
  const double k = static_cast<double>(s.sample_size);
  const double n = static_cast<double>(s.population);
  const double r = s.proportion();
  const double s2 = r * (1.0 - r) * k / (k - 1.0);
  return n * n * (1.0 - k / n) * s2 / k;
}

}  // namespace

std::uint64_t subset_seed(std::uint64_t seed, std::size_t subset) {
  return splitmix64(seed ^ splitmix64(0x5bd1e995ULL + subset));
}

StratumSample draw_sample(const Workload& workload, std::size_t subset, std::size_t k,
                          std::uint64_t seed, LabelSource& source) {
  const PairRange range = workload.subset(subset);
  const std::size_t n = range.size();
  if (k < 1 || k > n) throw ContractViolation("sample size must lie in [1, subset size]");

  std::vector<std::size_t> picks(n);
  std::iota(picks.begin(), picks.end(), range.begin);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(picks[i], picks[pick(rng)]);
  }
  picks.resize(k);
  std::sort(picks.begin(), picks.end());

  const auto labels = source.ask_batch(picks);
  const auto matches =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::match));
  return {subset, n, k, matches};
}

MeanStd stratified_mean_std(std::span<const StratumSample> samples) {
  if (samples.empty()) throw ContractViolation("no strata sampled");
  double n = 0.0;
  double weighted = 0.0;
  double var_terms = 0.0;
  for (const auto& s : samples) {
    n += static_cast<double>(s.population);
    weighted += static_cast<double>(s.population) * s.proportion();
    var_terms += stratum_variance_term(s);
  }
  return {weighted / n, std::sqrt(var_terms) / n};
}

double t_quantile(double theta, double dof) {
  const double c = capped(theta);
  if (!std::isfinite(dof)) return normal_quantile(c);
  if (!(dof >= 1.0)) throw ContractViolation("degrees of freedom must be at least 1");
  const boost::math::students_t dist(dof);
  return boost::math::quantile(boost::math::complement(dist, (1.0 - c) / 2.0));
}

double normal_quantile(double theta) {
  const double c = capped(theta);
  const boost::math::normal dist;
  return boost::math::quantile(boost::math::complement(dist, (1.0 - c) / 2.0));
}

double stratified_dof(std::span<const StratumSample> samples) {
  double dof = 0.0;
  for (const auto& s : samples) dof += static_cast<double>(s.sample_size) - 1.0;
  return std::max(dof, 1.0);
}

CountInterval count_interval(std::span<const StratumSample> samples, double theta) {
  const MeanStd ms = stratified_mean_std(samples);
  double n = 0.0;
  for (const auto& s : samples) n += static_cast<double>(s.population);
  const double t = t_quantile(theta, stratified_dof(samples));
  const double lo = n * (ms.mean - t * ms.std);
  const double hi = n * (ms.mean + t * ms.std);
  return {std::clamp(lo, 0.0, n), std::clamp(hi, 0.0, n), theta};
}

double split_confidence(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ContractViolation("confidence must lie in (0,1]");
  return std::sqrt(std::min(theta, 1.0));
}

StratifiedCounter::StratifiedCounter(std::vector<StratumSample> samples, double confidence)
    : samples_(std::move(samples)), confidence_(confidence) {
  const std::size_t m = samples_.size();
  count_prefix_.assign(m + 1, 0.0);
  variance_prefix_.assign(m + 1, 0.0);
  size_prefix_.assign(m + 1, 0.0);
  dof_prefix_.assign(m + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& s = samples_[k];
    count_prefix_[k + 1] = count_prefix_[k] + static_cast<double>(s.population) * s.proportion();
    variance_prefix_[k + 1] = variance_prefix_[k] + stratum_variance_term(s);
    size_prefix_[k + 1] = size_prefix_[k] + static_cast<double>(s.population);
    dof_prefix_[k + 1] = dof_prefix_[k] + static_cast<double>(s.sample_size) - 1.0;
  }
  t_cache_.assign(static_cast<std::size_t>(dof_prefix_[m]) + 2, -1.0);
}

CountInterval StratifiedCounter::interval(std::size_t first, std::size_t last_exclusive) const {
  if (first > last_exclusive || last_exclusive > samples_.size()) {
    throw ContractViolation("subset range out of bounds");
  }
  if (first == last_exclusive) return {0.0, 0.0, confidence_};
  const double mean = count_prefix_[last_exclusive] - count_prefix_[first];
  const double var = std::max(0.0, variance_prefix_[last_exclusive] - variance_prefix_[first]);
  const double n = size_prefix_[last_exclusive] - size_prefix_[first];
  if (var <= 0.0) {
    return {std::clamp(mean, 0.0, n), std::clamp(mean, 0.0, n), confidence_};
  }
  const auto dof = static_cast<std::size_t>(
      std::max(1.0, std::round(dof_prefix_[last_exclusive] - dof_prefix_[first])));
  double& t = t_cache_[std::min(dof, t_cache_.size() - 1)];
  if (t < 0.0) t = t_quantile(confidence_, static_cast<double>(dof));
  const double sd = std::sqrt(var);
  return {std::clamp(mean - t * sd, 0.0, n), std::clamp(mean + t * sd, 0.0, n), confidence_};
}

}  // namespace erqc
