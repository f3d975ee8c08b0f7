#include "erqc/proportion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

#include <json.hpp>

#include "erqc/errors.hpp"

namespace erqc {
namespace {

std::size_t ceil_fraction(std::size_t m, double p) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(m) * p - 1e-9));
}

StratumSample sample_subset(const Workload& workload, std::size_t subset,
                            const SamplingPolicy& policy, LabelSource& source) {
  const std::size_t n = workload.subset(subset).size();
  return draw_sample(workload, subset, std::min(policy.sample_size, n),
                     subset_seed(policy.seed, subset), source);
}

}  // namespace

void SamplingPolicy::validate() const {
  if (!(p_low > 0.0 && p_low <= p_high && p_high <= 1.0)) {
    throw ConfigError("sampling range must satisfy 0 < p_low <= p_high <= 1");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (sample_size < 2) throw ConfigError("per-subset sample size must be at least 2");
  if (!(kernel.signal_variance > 0.0 && kernel.length_scale > 0.0)) {
    throw ConfigError("kernel signal variance and length scale must be positive");
  }
  if (noise_variance && !(*noise_variance >= 0.0)) {
    throw ConfigError("noise variance must be non-negative");
  }
}

std::size_t initial_sample_count(std::size_t subset_count, double p_low) {
  return std::min(subset_count, ceil_fraction(subset_count, p_low));
}

std::size_t sample_budget(std::size_t subset_count, double p_high) {
  return std::min(subset_count, ceil_fraction(subset_count, p_high));
}

std::vector<std::size_t> equidistant_subsets(std::size_t subset_count, std::size_t count) {
  if (count < 2 || count > subset_count) {
    throw ConfigError("need between 2 and m initial subsets, got " + std::to_string(count) +
                      " of " + std::to_string(subset_count));
  }
  std::vector<std::size_t> out(count);
  const double step = static_cast<double>(subset_count - 1) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = static_cast<std::size_t>(std::llround(step * static_cast<double>(k)));
  }
  return out;
}

double sampling_noise_variance(const std::vector<StratumSample>& samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : samples) {
    const double r = s.proportion();
    sum += r * (1.0 - r) / static_cast<double>(s.sample_size);
  }
  return sum / static_cast<double>(samples.size());
}

gp::Model<double> fit_samples(const Workload& workload, const std::vector<StratumSample>& samples,
                              const SamplingPolicy& policy) {
  gp::Vector<double> v(static_cast<Eigen::Index>(samples.size()));
  gp::Vector<double> r(v.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = workload.subset_mean_metric(samples[k].subset);
    r(static_cast<Eigen::Index>(k)) = samples[k].proportion();
  }
  gp::Hyperparameters<double> h = policy.kernel;
  h.noise_variance = policy.noise_variance.value_or(sampling_noise_variance(samples));
  return gp::Model<double>::fit(std::move(v), std::move(r), h, policy.hyper);
}

ProportionFit fit_proportion_function(const Workload& workload, const SamplingPolicy& policy,
                                      LabelSource& source) {
  policy.validate();
  const std::size_t m = workload.subset_count();
  const std::size_t j0 = initial_sample_count(m, policy.p_low);
  const std::size_t budget = std::max(j0, sample_budget(m, policy.p_high));
  const auto initial = equidistant_subsets(m, j0);

  std::vector<StratumSample> samples;
  samples.reserve(budget);
  for (std::size_t s : initial) samples.push_back(sample_subset(workload, s, policy, source));
  auto model = fit_samples(workload, samples, policy);

  std::deque<std::pair<std::size_t, std::size_t>> queue;
  for (std::size_t k = 0; k + 1 < initial.size(); ++k) queue.emplace_back(initial[k], initial[k + 1]);

  while (!queue.empty() && samples.size() < budget) {
    const auto [a, b] = queue.front();
    queue.pop_front();
    if (b - a < 2) continue;
    const std::size_t x = (a + b) / 2;
    const StratumSample sx = sample_subset(workload, x, policy, source);
    const double predicted = model.mean_at(workload.subset_mean_metric(x));
    if (std::abs(predicted - sx.proportion()) >= policy.epsilon) {
      queue.emplace_back(a, x);
      queue.emplace_back(x, b);
    }
    samples.insert(std::upper_bound(samples.begin(), samples.end(), x,
                                    [](std::size_t s, const StratumSample& t) { return s < t.subset; }),
                   sx);
    model = fit_samples(workload, samples, policy);
  }
  return {std::move(model), std::move(samples), j0, budget};
}

std::string model_json(const gp::Model<double>& model) {
  nlohmann::json j;
  j["inputs"] = std::vector<double>(model.inputs().data(), model.inputs().data() + model.inputs().size());
  j["targets"] =
      std::vector<double>(model.targets().data(), model.targets().data() + model.targets().size());
  const auto& h = model.hyperparameters();
  j["signal_variance"] = h.signal_variance;
  j["length_scale"] = h.length_scale;
  j["noise_variance"] = h.noise_variance;
  j["jitter"] = model.jitter();
  return j.dump(2);
}

}  // namespace erqc
