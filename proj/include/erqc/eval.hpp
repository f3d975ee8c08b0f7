#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erqc/core.hpp"
#include "erqc/solvers.hpp"
#include "erqc/synthetic.hpp"

namespace erqc {

struct TrialReport {
  SolverKind solver = SolverKind::base;
  std::uint64_t seed = 0;
  double precision = 0.0;
  double recall = 0.0;
  double cost = 0.0;  // fraction of the workload inspected by the human
  bool success = false;
  bool exhausted = false;
  double runtime_seconds = 0.0;
  std::size_t human_begin = 0;
  std::size_t human_end = 0;
  std::string error;  // non-empty when the run failed
};

struct Aggregate {
  SolverKind solver = SolverKind::base;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_cost = 0.0;
  double success_rate = 0.0;
  double mean_runtime_seconds = 0.0;
};

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

// One solver run against a fresh ground-truth source. Failures are recorded.
TrialReport run_trial(const Workload& workload, SolverKind solver, SolverConfig config,
                      std::uint64_t seed);

std::vector<TrialReport> run_trials(const Workload& workload, SolverKind solver,
                                    const SolverConfig& config, std::size_t runs,
                                    std::uint64_t master_seed);

// Regenerates the workload for every trial from the trial seed, so trials with
// the same master seed are paired across solvers.
std::vector<TrialReport> run_trials(const SyntheticSpec& spec, SolverKind solver,
                                    const SolverConfig& config, std::size_t runs,
                                    std::uint64_t master_seed);

// Failed runs count as unsuccessful and are excluded from the means.
Aggregate aggregate(std::span<const TrialReport> trials);

enum class SweepAxis { alpha_beta, theta, tau, sigma, size };

std::string_view to_string(SweepAxis axis);
std::optional<SweepAxis> parse_axis(std::string_view text);

struct SweepCell {
  double value = 0.0;
  Aggregate aggregate;
  std::vector<TrialReport> trials;
};

struct SweepOptions {
  SweepAxis axis = SweepAxis::tau;
  std::vector<double> values;
  std::vector<SolverKind> solvers;
  SolverConfig config;
  SyntheticSpec spec;
  // Requirement axes run on this workload; synthetic axes ignore it. Without
  // it, requirement axes use one workload generated from `spec`.
  const Workload* workload = nullptr;
  std::size_t runs = 10;
  std::uint64_t master_seed = 0;
};

std::vector<SweepCell> sweep(const SweepOptions& options);

// fig5_<name>.csv, fig6_<name>.csv, fig7_tau.csv, fig8_sigma.csv, fig10_size.csv
std::string figure_file_name(SweepAxis axis, std::string_view dataset);

void write_trials_csv(std::ostream& out, std::span<const TrialReport> trials);
void write_aggregate_csv(std::ostream& out, std::span<const Aggregate> rows);
void write_sweep_csv(std::ostream& out, SweepAxis axis, std::span<const SweepCell> cells);
std::string sweep_json(SweepAxis axis, std::span<const SweepCell> cells);

}  // namespace erqc
