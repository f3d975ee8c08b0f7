#include "erqc/eval.hpp"

#include <chrono>
#include <ostream>

#include <json.hpp>

#include "erqc/csv.hpp"
#include "erqc/errors.hpp"
#include "erqc/label_source.hpp"
#include "erqc/metrics.hpp"
#include "erqc/random.hpp"
#include "erqc/workload_io.hpp"

namespace erqc {
namespace {

nlohmann::json aggregate_json(const Aggregate& a) {
  return {{"solver", to_string(a.solver)},
          {"runs", a.runs},
          {"failures", a.failures},
          {"mean_precision", a.mean_precision},
          {"mean_recall", a.mean_recall},
          {"mean_cost", a.mean_cost},
          {"success_rate", a.success_rate},
          {"mean_runtime_seconds", a.mean_runtime_seconds}};
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return derive_seed(master_seed, trial);
}

TrialReport run_trial(const Workload& workload, SolverKind solver, SolverConfig config,
                      std::uint64_t seed) {
  TrialReport r;
  r.solver = solver;
  r.seed = seed;
  config.seed = seed;
  try {
    LabelSource source(workload, SourceKind::ground_truth);
    const auto start = std::chrono::steady_clock::now();
    const Solution s = solve(solver, workload, config, source);
    r.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.precision = precision(workload, s.labels).value;
    r.recall = recall(workload, s.labels).value;
    r.cost = workload.empty() ? 0.0
                              : static_cast<double>(s.human_cost()) / static_cast<double>(workload.size());
    r.exhausted = s.exhausted;
    r.human_begin = s.partition.human_begin();
    r.human_end = s.partition.human_end();
    r.success = r.precision >= config.requirement.alpha && r.recall >= config.requirement.beta;
  } catch (const std::exception& e) {
    r.error = e.what();
    r.success = false;
  }
  return r;
}

std::vector<TrialReport> run_trials(const Workload& workload, SolverKind solver,
                                    const SolverConfig& config, std::size_t runs,
                                    std::uint64_t master_seed) {
  if (runs == 0) throw ConfigError("need at least one run");
  std::vector<TrialReport> out;
  out.reserve(runs);
  for (std::size_t t = 0; t < runs; ++t) {
    out.push_back(run_trial(workload, solver, config, trial_seed(master_seed, t)));
  }
  return out;
}

std::vector<TrialReport> run_trials(const SyntheticSpec& spec, SolverKind solver,
                                    const SolverConfig& config, std::size_t runs,
                                    std::uint64_t master_seed) {
  if (runs == 0) throw ConfigError("need at least one run");
  std::vector<TrialReport> out;
  out.reserve(runs);
  for (std::size_t t = 0; t < runs; ++t) {
    const std::uint64_t seed = trial_seed(master_seed, t);
    SyntheticSpec s = spec;
    s.seed = seed;
    const Workload w = generate(s);
    out.push_back(run_trial(w, solver, config, seed));
  }
  return out;
}

Aggregate aggregate(std::span<const TrialReport> trials) {
  Aggregate a;
  if (trials.empty()) return a;
  a.solver = trials.front().solver;
  a.runs = trials.size();
  std::size_t ok = 0;
  std::size_t successes = 0;
  for (const auto& t : trials) {
    if (!t.error.empty()) {
      ++a.failures;
      continue;
    }
    ++ok;
    if (t.success) ++successes;
    a.mean_precision += t.precision;
    a.mean_recall += t.recall;
    a.mean_cost += t.cost;
    a.mean_runtime_seconds += t.runtime_seconds;
  }
  if (ok > 0) {
    const double d = static_cast<double>(ok);
    a.mean_precision /= d;
    a.mean_recall /= d;
    a.mean_cost /= d;
    a.mean_runtime_seconds /= d;
  }
  a.success_rate = static_cast<double>(successes) / static_cast<double>(a.runs);
  return a;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::alpha_beta: return "alpha_beta";
    case SweepAxis::theta: return "theta";
    case SweepAxis::tau: return "tau";
    case SweepAxis::sigma: return "sigma";
    case SweepAxis::size: return "size";
  }
  return "unknown";
}

std::optional<SweepAxis> parse_axis(std::string_view text) {
  for (auto a : {SweepAxis::alpha_beta, SweepAxis::theta, SweepAxis::tau, SweepAxis::sigma,
                 SweepAxis::size}) {
    if (text == to_string(a)) return a;
  }
  if (text == "requirement" || text == "ab") return SweepAxis::alpha_beta;
  return std::nullopt;
}

std::vector<SweepCell> sweep(const SweepOptions& o) {
  if (o.values.empty() || o.solvers.empty()) throw ConfigError("sweep needs values and solvers");
  const bool requirement_axis = o.axis == SweepAxis::alpha_beta || o.axis == SweepAxis::theta;
  std::optional<Workload> generated;
  const Workload* fixed = o.workload;
  if (requirement_axis && !fixed) {
    generated.emplace(generate(o.spec));
    fixed = &*generated;
  }

  std::vector<SweepCell> cells;
  for (double value : o.values) {
    SolverConfig config = o.config;
    SyntheticSpec spec = o.spec;
    switch (o.axis) {
      case SweepAxis::alpha_beta:
        config.requirement.alpha = value;
        config.requirement.beta = value;
        break;
      case SweepAxis::theta: config.requirement.theta = value; break;
      case SweepAxis::tau: spec.tau = value; break;
      case SweepAxis::sigma: spec.sigma = value; break;
      case SweepAxis::size: spec.n_pairs = static_cast<std::size_t>(value); break;
    }
    config.validate();
    for (SolverKind solver : o.solvers) {
      SweepCell cell;
      cell.value = value;
      cell.trials = requirement_axis ? run_trials(*fixed, solver, config, o.runs, o.master_seed)
                                     : run_trials(spec, solver, config, o.runs, o.master_seed);
      cell.aggregate = aggregate(cell.trials);
      cell.aggregate.solver = solver;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string figure_file_name(SweepAxis axis, std::string_view dataset) {
  switch (axis) {
    case SweepAxis::alpha_beta: return "fig5_" + std::string(dataset) + ".csv";
    case SweepAxis::theta: return "fig6_" + std::string(dataset) + ".csv";
    case SweepAxis::tau: return "fig7_tau.csv";
    case SweepAxis::sigma: return "fig8_sigma.csv";
    case SweepAxis::size: return "fig10_size.csv";
  }
  return "sweep.csv";
}

void write_trials_csv(std::ostream& out, std::span<const TrialReport> trials) {
  out << "solver,seed,precision,recall,cost,success,exhausted,runtime_seconds,human_begin,"
         "human_end,error\n";
  for (const auto& t : trials) {
    out << to_string(t.solver) << ',' << t.seed << ',' << format_double(t.precision) << ','
        << format_double(t.recall) << ',' << format_double(t.cost) << ',' << (t.success ? 1 : 0)
        << ',' << (t.exhausted ? 1 : 0) << ',' << format_double(t.runtime_seconds) << ','
        << t.human_begin << ',' << t.human_end << ',' << csv::escape(t.error) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const Aggregate> rows) {
  out << "solver,runs,failures,mean_precision,mean_recall,mean_cost,success_rate,"
         "mean_runtime_seconds\n";
  for (const auto& a : rows) {
    out << to_string(a.solver) << ',' << a.runs << ',' << a.failures << ','
        << format_double(a.mean_precision) << ',' << format_double(a.mean_recall) << ','
        << format_double(a.mean_cost) << ',' << format_double(a.success_rate) << ','
        << format_double(a.mean_runtime_seconds) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, std::span<const SweepCell> cells) {
  out << to_string(axis)
      << ",solver,runs,failures,mean_precision,mean_recall,mean_cost,success_rate,"
         "mean_runtime_seconds\n";
  for (const auto& c : cells) {
    const auto& a = c.aggregate;
    out << format_double(c.value) << ',' << to_string(a.solver) << ',' << a.runs << ','
        << a.failures << ',' << format_double(a.mean_precision) << ','
        << format_double(a.mean_recall) << ',' << format_double(a.mean_cost) << ','
        << format_double(a.success_rate) << ',' << format_double(a.mean_runtime_seconds) << '\n';
  }
}

std::string sweep_json(SweepAxis axis, std::span<const SweepCell> cells) {
  nlohmann::json j;
  j["axis"] = to_string(axis);
  j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    auto cell = aggregate_json(c.aggregate);
    cell["value"] = c.value;
    j["cells"].push_back(std::move(cell));
  }
  return j.dump(2);
}

}  // namespace erqc
