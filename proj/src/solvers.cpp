#include "erqc/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "erqc/errors.hpp"
#include "erqc/metrics.hpp"

namespace erqc {
namespace {

double pair_count(const Workload& w, std::size_t first, std::size_t last_exclusive) {
  return static_cast<double>(w.subsets(first, last_exclusive).size());
}

// Precision once D_H is labeled by the human: only true matches in D_H are
// labeled match, so the positives are M_H + |D+|.
double certified_precision(double matches_human, double plus_lb, double n_plus) {
  const double den = matches_human + n_plus;
  return den > 0.0 ? (matches_human + plus_lb) / den : 1.0;
}

// Per-subset match counts of the subsets the human has labeled so far; the
// labeled subsets always form one contiguous run.
class SubsetLabels {
 public:
  SubsetLabels(const Workload& w, LabelSource& source)
      : w_(w), source_(source), matches_(w.subset_count(), 0) {}

  void absorb(std::size_t subset) {
    const PairRange r = w_.subset(subset);
    std::vector<std::size_t> idx(r.size());
    std::iota(idx.begin(), idx.end(), r.begin);
    const auto labels = source_.ask_batch(idx);
    matches_[subset] =
        static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::match));
    total_ += static_cast<double>(matches_[subset]);
  }

  double total() const noexcept { return total_; }

  // Matches over labeled subsets [first, last_exclusive); meant for windows.
  double matches(std::size_t first, std::size_t last_exclusive) const {
    double sum = 0.0;
    for (std::size_t k = first; k < last_exclusive; ++k) sum += static_cast<double>(matches_[k]);
    return sum;
  }

  double proportion(std::size_t first, std::size_t last_exclusive) const {
    const double n = pair_count(w_, first, last_exclusive);
    return n > 0.0 ? matches(first, last_exclusive) / n : 0.0;
  }

  double total_proportion(std::size_t first, std::size_t last_exclusive) const {
    const double n = pair_count(w_, first, last_exclusive);
    return n > 0.0 ? total_ / n : 0.0;
  }

 private:
  const Workload& w_;
  LabelSource& source_;
  std::vector<std::size_t> matches_;
  double total_ = 0.0;
};

void label_range(const Workload& w, const Partition& p, LabelSource& source) {
  const PairRange r = p.human_pairs(w);
  std::vector<std::size_t> idx(r.size());
  std::iota(idx.begin(), idx.end(), r.begin);
  source.ask_batch(idx);
}

Solution finish(SolverKind kind, const Workload& w, const Partition& partition,
                const SolverConfig& config, LabelSource& source, BoundEstimates bounds,
                std::vector<std::string> warnings) {
  Solution s;
  s.solver = kind;
  s.partition = partition;
  s.seed = config.seed;
  s.warnings = std::move(warnings);
  s.human_labeled = source.asked_pairs();
  s.labels = LabelAssignment(w.size());
  const PairRange minus = partition.minus_pairs(w);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (auto l = source.cached(i)) {
      s.labels.set(i, *l, LabelOrigin::human);
    } else {
      s.labels.set(i, minus.contains(i) ? Label::unmatch : Label::match, LabelOrigin::machine);
    }
  }
  const PairRange human = partition.human_pairs(w);
  double mh = 0.0;
  for (std::size_t i = human.begin; i < human.end; ++i) {
    if (s.labels.label(i) == Label::match) mh += 1.0;
  }
  bounds.matches_human = mh;
  s.bounds = bounds;
  s.exhausted = w.size() > 0 && partition.all_human();
  source.set_bounds(partition);
  source.set_phase(Phase::done);
  return s;
}

void require_nonempty(const Workload& w) {
  if (w.empty()) throw ContractViolation("workload is empty");
}

std::vector<StratumSample> sample_all(const Workload& w, const SolverConfig& config,
                                      LabelSource& source) {
  std::vector<StratumSample> out;
  out.reserve(w.subset_count());
  for (std::size_t k = 0; k < w.subset_count(); ++k) {
    const std::size_t n = w.subset(k).size();
    out.push_back(draw_sample(w, k, std::min(config.sample_size, n), subset_seed(config.seed, k), source));
  }
  return out;
}

// Outcome of the sampling phase: bounds on D_H plus the estimator behind them.
struct SamplingPlan {
  Partition partition;
  RangeInterval interval;
  BoundProvenance provenance = BoundProvenance::sampling;
  std::vector<std::string> warnings;
};

SamplingPlan stratified_plan(const Workload& w, const SolverConfig& config,
                             std::vector<StratumSample> samples) {
  const double c = split_confidence(config.requirement.theta);
  auto counter = std::make_shared<StratifiedCounter>(std::move(samples), c);
  SamplingPlan plan;
  plan.interval = [counter](std::size_t a, std::size_t b) { return counter->interval(a, b); };
  plan.partition = optimal_bounds(w, config.requirement, plan.interval);
  plan.provenance = BoundProvenance::sampling;
  return plan;
}

SamplingPlan all_sampling_plan(const Workload& w, const SolverConfig& config, LabelSource& source) {
  source.set_phase(Phase::sampling);
  return stratified_plan(w, config, sample_all(w, config, source));
}

SamplingPlan partial_sampling_plan(const Workload& w, const SolverConfig& config,
                                   LabelSource& source) {
  source.set_phase(Phase::sampling);
  const SamplingPolicy policy = config.sampling_policy();
  try {
    ProportionFit fit = fit_proportion_function(w, policy, source);
    if (fit.samples.size() == w.subset_count()) {
      return stratified_plan(w, config, std::move(fit.samples));
    }
    const auto m = static_cast<Eigen::Index>(w.subset_count());
    gp::Vector<double> query(m);
    gp::Vector<double> sizes(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      query(k) = w.subset_mean_metric(static_cast<std::size_t>(k));
      sizes(k) = static_cast<double>(w.subset(static_cast<std::size_t>(k)).size());
    }
    const auto post = fit.model.posterior(query);
    auto counter = std::make_shared<gp::RangeCounter<double>>(
        post, sizes, split_confidence(config.requirement.theta));
    SamplingPlan plan;
    plan.interval = [counter](std::size_t a, std::size_t b) { return counter->interval(a, b).interval; };
    plan.partition = optimal_bounds(w, config.requirement, plan.interval);
    plan.provenance = BoundProvenance::gaussian_process;
    return plan;
  } catch (const NumericalError& e) {
    SamplingPlan plan = all_sampling_plan(w, config, source);
    plan.warnings.push_back(std::string("GP fit failed, fell back to sampling every subset: ") +
                            e.what());
    return plan;
  }
}

Solution finish_plan(SolverKind kind, const Workload& w, const SolverConfig& config,
                     LabelSource& source, SamplingPlan plan) {
  source.set_bounds(plan.partition);
  source.set_phase(Phase::verification);
  label_range(w, plan.partition, source);
  const std::size_t m = w.subset_count();
  BoundEstimates b;
  b.matches_plus_lb = plan.interval(plan.partition.human_end(), m).lower;
  b.matches_minus_ub = plan.interval(0, plan.partition.human_begin()).upper;
  b.plus_provenance = plan.partition.human_end() == m ? BoundProvenance::exact : plan.provenance;
  b.minus_provenance = plan.partition.human_begin() == 0 ? BoundProvenance::exact : plan.provenance;
  return finish(kind, w, plan.partition, config, source, b, std::move(plan.warnings));
}

}  // namespace

void SolverConfig::validate() const {
  requirement.validate();
  if (base_window < 3 || base_window > 10) throw ConfigError("base window must lie in [3, 10]");
  if (initial_metric && !(*initial_metric >= 0.0 && *initial_metric <= 1.0)) {
    throw ConfigError("initial metric must lie in [0, 1]");
  }
  sampling_policy().validate();
}

SamplingPolicy SolverConfig::sampling_policy() const {
  SamplingPolicy p;
  p.p_low = sample_low;
  p.p_high = sample_high;
  p.epsilon = epsilon;
  p.sample_size = sample_size;
  p.seed = seed;
  p.kernel = kernel;
  p.noise_variance = noise_variance;
  p.hyper = hyper;
  return p;
}

std::optional<double> base_precision_threshold(double alpha, double n_plus, double n_human,
                                               double human_proportion) {
  if (n_plus <= 0.0) return std::nullopt;
  return (alpha * n_plus - (1.0 - alpha) * human_proportion * n_human) / n_plus;
}

std::optional<double> base_recall_threshold(double beta, double n_minus, double n_human,
                                            double human_proportion, double n_plus,
                                            double plus_window_proportion) {
  if (n_minus <= 0.0) return std::nullopt;
  if (beta <= 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - beta) * (n_human * human_proportion + n_plus * plus_window_proportion) /
         (beta * n_minus);
}

std::size_t initial_boundary_subset(const Workload& w, const SolverConfig& config) {
  require_nonempty(w);
  if (config.initial_subset) {
    if (*config.initial_subset >= w.subset_count()) {
      throw ConfigError("initial subset " + std::to_string(*config.initial_subset) +
                        " is out of range");
    }
    return *config.initial_subset;
  }
  if (config.initial_metric) {
    const auto& pairs = w.pairs();
    auto it = std::lower_bound(pairs.begin(), pairs.end(), *config.initial_metric,
                               [](const InstancePair& p, double v) { return p.metric < v; });
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - pairs.begin()), w.size() - 1);
    return w.subset_of(i);
  }
  return w.subset_of((w.size() - 1) / 2);
}

Partition optimal_bounds(const Workload& w, const QualityRequirement& req,
                         const RangeInterval& interval) {
  const std::size_t m = w.subset_count();
  if (m == 0) return Partition(0, 0, 0);

  auto recall_ok = [&](std::size_t i) {
    const double lb = interval(i, m).lower;
    const double ub = interval(0, i).upper;
    const double den = ub + lb;
    return den <= 0.0 || req.beta <= lb / den;
  };
  auto precision_ok = [&](std::size_t i, std::size_t e) {
    const double lb_h = interval(i, e).lower;
    const double lb_p = interval(e, m).lower;
    const double den = lb_h + pair_count(w, e, m);
    return den <= 0.0 || req.alpha <= (lb_h + lb_p) / den;
  };

  std::size_t i_max = 0;
  while (i_max < m && recall_ok(i_max + 1)) ++i_max;

  std::size_t best_i = 0;
  std::size_t best_e = m;
  double best_size = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= i_max; ++i) {
    std::size_t e = m;
    while (e > i && precision_ok(i, e - 1)) --e;
    const double size = pair_count(w, i, e);
    if (size <= best_size) {
      best_size = size;
      best_i = i;
      best_e = e;
    }
  }
  return Partition(best_i, best_e, m);
}

Solution base_search(const Workload& w, const SolverConfig& config, LabelSource& source) {
  config.validate();
  require_nonempty(w);
  const auto& req = config.requirement;
  const std::size_t m = w.subset_count();
  const std::size_t s0 = initial_boundary_subset(w, config);
  const std::size_t win = config.base_window;

  source.set_phase(Phase::verification);
  SubsetLabels labels(w, source);
  std::size_t lo = s0;
  std::size_t hi = s0;

  auto upper_window = [&] { return labels.proportion(hi - std::min(win, hi - lo), hi); };
  auto lower_window = [&] { return labels.proportion(lo, lo + std::min(win, hi - lo)); };
  auto upper_ok = [&] {
    const double n_h = pair_count(w, lo, hi);
    const auto t = base_precision_threshold(req.alpha, pair_count(w, hi, m), n_h,
                                            labels.total_proportion(lo, hi));
    return !t || upper_window() >= *t;
  };
  auto lower_ok = [&] {
    const double n_h = pair_count(w, lo, hi);
    const auto t = base_recall_threshold(req.beta, pair_count(w, 0, lo), n_h,
                                         labels.total_proportion(lo, hi), pair_count(w, hi, m),
                                         upper_window());
    return !t || lower_window() <= *t;
  };

  bool upper_frozen = false;
  bool lower_frozen = false;
  auto check = [&] {
    if (!upper_frozen && upper_ok()) upper_frozen = true;
    if (!lower_frozen && lower_ok()) lower_frozen = true;
    source.set_bounds(Partition(lo, hi, m));
  };

  while (!(upper_frozen && lower_frozen)) {
    if (!upper_frozen) {
      if (hi < m) labels.absorb(hi++);
      check();
    }
    if (!lower_frozen) {
      if (lo > 0) labels.absorb(--lo);
      check();
    }
  }

  BoundEstimates b;
  b.matches_plus_lb = pair_count(w, hi, m) * upper_window();
  b.matches_minus_ub = pair_count(w, 0, lo) * lower_window();
  b.plus_provenance = hi == m ? BoundProvenance::exact : BoundProvenance::monotonicity;
  b.minus_provenance = lo == 0 ? BoundProvenance::exact : BoundProvenance::monotonicity;
  return finish(SolverKind::base, w, Partition(lo, hi, m), config, source, b, {});
}

Solution all_sampling_search(const Workload& w, const SolverConfig& config, LabelSource& source) {
  config.validate();
  require_nonempty(w);
  return finish_plan(SolverKind::all_sampling, w, config, source, all_sampling_plan(w, config, source));
}

Solution partial_sampling_search(const Workload& w, const SolverConfig& config,
                                 LabelSource& source) {
  config.validate();
  require_nonempty(w);
  return finish_plan(SolverKind::partial_sampling, w, config, source,
                     partial_sampling_plan(w, config, source));
}

Solution hybrid_search(const Workload& w, const SolverConfig& config, LabelSource& source) {
  config.validate();
  require_nonempty(w);
  const auto& req = config.requirement;
  const std::size_t m = w.subset_count();
  const std::size_t win = config.base_window;

  SamplingPlan plan = partial_sampling_plan(w, config, source);
  const Partition s0 = plan.partition;
  source.set_phase(Phase::verification);
  source.set_bounds(s0);
  if (s0.human_empty()) {
    return finish_plan(SolverKind::hybrid, w, config, source, std::move(plan));
  }

  const std::size_t cap_lo = s0.human_begin();
  const std::size_t cap_hi = s0.human_end();
  SubsetLabels labels(w, source);
  std::size_t lo = cap_lo + (cap_hi - 1 - cap_lo) / 2;
  std::size_t hi = lo + 1;
  labels.absorb(lo);

  BoundEstimates b;
  auto plus_lb = [&] {
    const double n_plus = pair_count(w, hi, m);
    const double mono = n_plus * labels.proportion(hi - std::min(win, hi - lo), hi);
    const double sampled = plan.interval(hi, m).lower;
    b.plus_provenance = hi == m ? BoundProvenance::exact
                        : mono >= sampled ? BoundProvenance::monotonicity
                                          : plan.provenance;
    return std::max(mono, sampled);
  };
  auto minus_ub = [&] {
    const double n_minus = pair_count(w, 0, lo);
    const double mono = n_minus * labels.proportion(lo, lo + std::min(win, hi - lo));
    const double sampled = plan.interval(0, lo).upper;
    b.minus_provenance = lo == 0 ? BoundProvenance::exact
                         : mono <= sampled ? BoundProvenance::monotonicity
                                           : plan.provenance;
    return std::min(mono, sampled);
  };
  bool p_ok = false;
  bool r_ok = false;
  auto check = [&] {
    const double m_h = labels.total();
    const double lb = plus_lb();
    const double ub = minus_ub();
    b.matches_plus_lb = lb;
    b.matches_minus_ub = ub;
    p_ok = certified_precision(m_h, lb, pair_count(w, hi, m)) >= req.alpha;
    r_ok = recall_lower_bound(lb, m_h, ub).value >= req.beta;
    source.set_bounds(Partition(lo, hi, m));
  };

  check();
  bool upper_turn = true;
  while (!(p_ok && r_ok)) {
    const bool can_up = hi < cap_hi;
    const bool can_down = lo > cap_lo;
    if (!can_up && !can_down) break;
    // Each side moves for its own condition; a capped side hands its work to the other.
    bool want_up = can_up && (!p_ok || (!r_ok && !can_down));
    bool want_down = can_down && (!r_ok || (!p_ok && !can_up));
    if (!want_up && !want_down) {
      want_up = can_up;
      want_down = can_down;
    }
    const bool go_up = want_up && (upper_turn || !want_down);
    if (go_up) {
      labels.absorb(hi++);
    } else {
      labels.absorb(--lo);
    }
    upper_turn = !go_up;
    check();
  }

  std::vector<std::string> warnings = std::move(plan.warnings);
  if (!(p_ok && r_ok)) {
    // Both sides reached S0's range, which S0's own bounds already certify.
    b.matches_plus_lb = plan.interval(cap_hi, m).lower;
    b.matches_minus_ub = plan.interval(0, cap_lo).upper;
    b.plus_provenance = cap_hi == m ? BoundProvenance::exact : plan.provenance;
    b.minus_provenance = cap_lo == 0 ? BoundProvenance::exact : plan.provenance;
  }
  return finish(SolverKind::hybrid, w, Partition(lo, hi, m), config, source, b, std::move(warnings));
}

Solution solve(SolverKind kind, const Workload& w, const SolverConfig& config, LabelSource& source) {
  switch (kind) {
    case SolverKind::base: return base_search(w, config, source);
    case SolverKind::all_sampling: return all_sampling_search(w, config, source);
    case SolverKind::partial_sampling: return partial_sampling_search(w, config, source);
    case SolverKind::hybrid: return hybrid_search(w, config, source);
  }
  throw ContractViolation("unknown solver kind");
}

}  // namespace erqc
