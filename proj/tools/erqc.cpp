// erqc: resolve, serve, generate and evaluate from the command line.

#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "erqc/csv.hpp"
#include "erqc/errors.hpp"
#include "erqc/eval.hpp"
#include "erqc/label_source.hpp"
#include "erqc/service.hpp"
#include "erqc/similarity.hpp"
#include "erqc/solution_io.hpp"
#include "erqc/solvers.hpp"
#include "erqc/synthetic.hpp"
#include "erqc/workload_io.hpp"

namespace fs = std::filesystem;
using namespace erqc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitExhausted = 2;

struct InputOptions {
  std::string workload;
  std::string table_a;
  std::string table_b;
  std::string gold;
  std::vector<std::string> attributes;  // name:measure[:weight]
  double threshold = 0.0;
  bool prefilter = false;
  std::size_t subset_size = Workload::kDefaultSubsetSize;
};

struct LoadedInput {
  std::optional<Workload> workload;
  std::optional<RecordTable> a;
  std::optional<RecordTable> b;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--workload,-w", in.workload, "Workload CSV (id,metric[,truth])");
  cmd->add_option("--table-a", in.table_a, "Record CSV for the first collection");
  cmd->add_option("--table-b", in.table_b, "Record CSV for the second collection");
  cmd->add_option("--gold", in.gold, "Gold mapping CSV (id_a,id_b)");
  cmd->add_option("--attr", in.attributes,
                  "Attribute rule name:jaccard|jw[:weight]; weights default to distinct-value counts");
  cmd->add_option("--threshold", in.threshold, "Blocking threshold")->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--prefilter", in.prefilter, "Token inverted-index prefilter");
  cmd->add_option("--subset-size", in.subset_size, "Pairs per unit subset")->check(CLI::PositiveNumber);
}

LoadedInput load_input(const InputOptions& in) {
  LoadedInput out;
  if (!in.workload.empty()) {
    if (!in.table_a.empty() || !in.table_b.empty()) {
      throw ConfigError("give either --workload or --table-a/--table-b, not both");
    }
    out.workload.emplace(read_workload_file(in.workload, in.subset_size));
    return out;
  }
  if (in.table_a.empty() || in.table_b.empty()) {
    throw ConfigError("need --workload or both --table-a and --table-b");
  }
  out.a.emplace(read_records(in.table_a));
  out.b.emplace(read_records(in.table_b));

  SimilarityConfig sc;
  sc.blocking_threshold = in.threshold;
  sc.token_prefilter = in.prefilter;
  std::vector<std::string> names;
  bool explicit_weights = false;
  for (const auto& spec : in.attributes) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("bad --attr '" + spec + "'");
    const auto measure = parse_measure(parts[1]);
    if (!measure) throw ConfigError("unknown measure '" + parts[1] + "'");
    AttributeRule rule{parts[0], *measure, 1.0};
    if (parts.size() == 3) {
      rule.weight = std::stod(parts[2]);
      explicit_weights = true;
    }
    names.push_back(parts[0]);
    sc.rules.push_back(rule);
  }
  if (sc.rules.empty()) {
    for (const auto& name : out.a->attributes) {
      names.push_back(name);
      sc.rules.push_back({name, Measure::jaccard_tokens, 1.0});
    }
  }
  if (!explicit_weights) {
    const auto derived = derive_weights(*out.a, *out.b, names);
    for (const auto& w : derived.warnings) std::cerr << "warning: " << w << "\n";
    for (std::size_t k = 0; k < sc.rules.size(); ++k) sc.rules[k].weight = derived.weights[k];
  }
  std::optional<GoldPairs> gold;
  if (!in.gold.empty()) gold.emplace(read_gold(in.gold));
  auto blocked = block(*out.a, *out.b, sc, gold ? &*gold : nullptr, in.subset_size);
  std::cerr << "blocking kept " << blocked.workload.size() << " of " << blocked.candidate_pairs
            << " scored pairs\n";
  out.workload.emplace(std::move(blocked.workload));
  return out;
}

struct SolverOptions {
  std::string solver = "hybrid";
  double alpha = 0.9;
  double beta = 0.9;
  double theta = 0.9;
  std::size_t window = 5;
  double p_low = 0.01;
  double p_high = 0.05;
  double epsilon = 0.05;
  std::size_t sample_size = 20;
  std::optional<std::size_t> initial_subset;
  std::optional<double> initial_metric;
  bool grid = false;
  std::uint64_t seed = 0;
};

void add_solver_options(CLI::App* cmd, SolverOptions& s, bool with_solver) {
  if (with_solver) cmd->add_option("--solver,-s", s.solver, "base | all | samp | hybrid");
  cmd->add_option("--alpha", s.alpha, "Precision requirement")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--beta", s.beta, "Recall requirement")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--theta", s.theta, "Confidence level")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--window", s.window, "BASE window in subsets (3-10)");
  cmd->add_option("--p-low", s.p_low, "Lower sampling fraction of subsets");
  cmd->add_option("--p-high", s.p_high, "Upper sampling fraction of subsets");
  cmd->add_option("--epsilon", s.epsilon, "GP refinement threshold");
  cmd->add_option("--sample-size", s.sample_size, "Pairs sampled per subset");
  cmd->add_option("--initial-subset", s.initial_subset, "BASE starting subset");
  cmd->add_option("--initial-metric", s.initial_metric, "BASE starting metric value");
  cmd->add_flag("--grid", s.grid, "Grid-search GP hyperparameters");
  cmd->add_option("--seed", s.seed, "Random seed");
}

SolverKind solver_kind(const std::string& name) {
  const auto k = parse_solver(name);
  if (!k) throw ConfigError("unknown solver '" + name + "'");
  return *k;
}

SolverConfig solver_config(const SolverOptions& s) {
  SolverConfig c;
  c.requirement = {s.alpha, s.beta, s.theta};
  c.base_window = s.window;
  c.sample_low = s.p_low;
  c.sample_high = s.p_high;
  c.epsilon = s.epsilon;
  c.sample_size = s.sample_size;
  c.initial_subset = s.initial_subset;
  c.initial_metric = s.initial_metric;
  c.hyper = s.grid ? gp::HyperPolicy::grid_search : gp::HyperPolicy::fixed;
  c.seed = s.seed;
  c.validate();
  return c;
}

std::unordered_map<std::string, Label> read_transcript(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const auto id_col = t.column("pair_id") ? t.column("pair_id") : t.column("id");
  const auto label_col = t.column("label");
  if (!id_col || !label_col) throw ParseError(path, 1, "transcript needs pair_id (or id) and label columns");
  std::unordered_map<std::string, Label> out;
  for (const auto& row : t.rows) {
    const auto label = parse_label(row.fields.at(*label_col));
    if (!label) throw ParseError(path, row.line, "bad label '" + row.fields.at(*label_col) + "'");
    out[row.fields.at(*id_col)] = *label;
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void write_outputs(const fs::path& dir, const Workload& w, const Solution& s, const SolverConfig& c) {
  fs::create_directories(dir);
  write_text(dir / "solution.json", solution_json(w, s, c).dump(2) + "\n");
  std::ofstream labels(dir / "labels.csv", std::ios::binary);
  write_labels_csv(labels, w, s);
  write_text(dir / "summary.txt", summary_text(w, s, c));
}

int cmd_resolve(const InputOptions& in, const SolverOptions& so, const std::string& oracle,
                const std::string& transcript, const std::string& out_dir, const std::string& journal) {
  const SolverConfig config = solver_config(so);
  const SolverKind kind = solver_kind(so.solver);
  const LoadedInput input = load_input(in);
  const Workload& w = *input.workload;

  std::optional<LabelSource> source;
  if (oracle == "ground-truth") {
    if (!w.has_truth()) throw ConfigError("--oracle ground-truth needs a truth column (or --gold)");
    source.emplace(w, SourceKind::ground_truth);
  } else if (oracle == "transcript") {
    if (transcript.empty()) throw ConfigError("--oracle transcript needs --transcript");
    source.emplace(w, read_transcript(transcript));
  } else {
    throw ConfigError("unknown oracle '" + oracle + "' (interactive labeling runs under `serve`)");
  }
  if (!journal.empty()) source->attach_journal(journal);

  const Solution s = solve(kind, w, config, *source);
  write_outputs(out_dir, w, s, config);
  std::cout << summary_text(w, s, config);
  return s.exhausted ? kExitExhausted : kExitOk;
}

volatile std::sig_atomic_t g_stop = 0;

extern "C" void handle_signal(int) { g_stop = 1; }

int cmd_serve(const InputOptions& in, const SolverOptions& so, const std::string& host, int port,
              const std::string& static_dir, const std::string& journal, const std::string& out_dir,
              bool exit_when_done) {
  const SolverConfig config = solver_config(so);
  const SolverKind kind = solver_kind(so.solver);
  const LoadedInput input = load_input(in);
  const Workload& w = *input.workload;

  ServiceOptions opts;
  opts.static_dir = static_dir;
  opts.journal_path = journal;
  if (input.a && input.b) {
    const RecordTable& a = *input.a;
    const RecordTable& b = *input.b;
    opts.display = [&a, &b](const InstancePair& p) {
      nlohmann::json j = nlohmann::json::object();
      const auto ids = split_pair_id(p.id);
      if (!ids) return j;
      auto record = [](const RecordTable& t, const std::string& id) {
        nlohmann::json r = {{"id", id}};
        if (const auto k = t.record_index(id)) {
          for (std::size_t c = 0; c < t.attributes.size(); ++c) r[t.attributes[c]] = t.values[*k][c];
        }
        return r;
      };
      j["a"] = record(a, ids->first);
      j["b"] = record(b, ids->second);
      return j;
    };
  }

  LabelService service(w, kind, config, opts);
  const int bound = service.bind(host, service_port(port));
  std::cerr << "serving on http://" << host << ":" << bound << "\n";
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  service.start_solver();
  service.listen_in_background();
  while (!service.done() && !g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  if (!service.done()) {
    service.stop();
    std::cerr << "interrupted; answers so far are in the journal\n";
    return kExitError;
  }

  int code = kExitOk;
  if (const auto s = service.solution()) {
    write_outputs(out_dir, w, *s, config);
    std::cout << summary_text(w, *s, config);
    code = s->exhausted ? kExitExhausted : kExitOk;
  } else {
    std::cerr << "error: " << service.error().value_or("solver stopped") << "\n";
    code = kExitError;
  }
  if (!exit_when_done && code != kExitError) {
    std::cerr << "solution ready; still serving (Ctrl-C to exit)\n";
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  service.stop();
  return code;
}

int cmd_generate(const SyntheticSpec& spec, const std::string& out) {
  const Workload w = generate(spec);
  if (out.empty() || out == "-") {
    write_workload(std::cout, w);
  } else {
    write_workload_file(out, w);
  }
  return kExitOk;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string v; std::getline(ss, v, ',');) {
    if (!v.empty()) out.push_back(std::stod(v));
  }
  return out;
}

std::vector<double> default_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::alpha_beta: return {0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    case SweepAxis::theta: return {0.8, 0.85, 0.9, 0.95};
    case SweepAxis::tau: return {8, 10, 12, 14, 16, 18};
    case SweepAxis::sigma: return {0.1, 0.2, 0.3, 0.4, 0.5};
    case SweepAxis::size: return {50000, 100000, 200000, 400000};
  }
  return {};
}

int cmd_evaluate(const InputOptions& in, const SolverOptions& so, const SyntheticSpec& spec,
                 const std::string& solvers_text, std::size_t runs, const std::string& axis_text,
                 const std::string& values_text, const std::string& name, const std::string& out_dir) {
  const SolverConfig config = solver_config(so);
  std::vector<SolverKind> solvers;
  {
    std::stringstream ss(solvers_text);
    for (std::string s; std::getline(ss, s, ',');) {
      if (!s.empty()) solvers.push_back(solver_kind(s));
    }
  }
  if (solvers.empty()) throw ConfigError("--solvers is empty");
  std::optional<LoadedInput> input;
  if (!in.workload.empty() || !in.table_a.empty()) input.emplace(load_input(in));
  fs::create_directories(out_dir);

  if (!axis_text.empty()) {
    const auto axis = parse_axis(axis_text);
    if (!axis) throw ConfigError("unknown sweep axis '" + axis_text + "'");
    SweepOptions o;
    o.axis = *axis;
    o.values = values_text.empty() ? default_values(*axis) : parse_values(values_text);
    o.solvers = solvers;
    o.config = config;
    o.spec = spec;
    o.workload = input ? &*input->workload : nullptr;
    o.runs = runs;
    o.master_seed = so.seed;
    const auto cells = sweep(o);
    std::ofstream fig(fs::path(out_dir) / figure_file_name(*axis, name), std::ios::binary);
    write_sweep_csv(fig, *axis, cells);
    write_text(fs::path(out_dir) / ("sweep_" + std::string(to_string(*axis)) + ".json"),
               sweep_json(*axis, cells) + "\n");
    std::vector<TrialReport> all;
    for (const auto& c : cells) all.insert(all.end(), c.trials.begin(), c.trials.end());
    std::ofstream trials(fs::path(out_dir) / "trials.csv", std::ios::binary);
    write_trials_csv(trials, all);
    write_sweep_csv(std::cout, *axis, cells);
    return kExitOk;
  }

  std::vector<TrialReport> all;
  std::vector<Aggregate> rows;
  for (SolverKind k : solvers) {
    const auto trials = input ? run_trials(*input->workload, k, config, runs, so.seed)
                              : run_trials(spec, k, config, runs, so.seed);
    rows.push_back(aggregate(trials));
    rows.back().solver = k;
    all.insert(all.end(), trials.begin(), trials.end());
  }
  std::ofstream trials(fs::path(out_dir) / "trials.csv", std::ios::binary);
  write_trials_csv(trials, all);
  std::ofstream agg(fs::path(out_dir) / "aggregate.csv", std::ios::binary);
  write_aggregate_csv(agg, rows);
  write_aggregate_csv(std::cout, rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partition entity-resolution pair labeling between machine and human"};
  app.require_subcommand(1);

  InputOptions input;
  SolverOptions solver;
  SyntheticSpec spec;
  std::string oracle = "ground-truth";
  std::string transcript;
  std::string out_dir = "erqc-out";
  std::string journal;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  bool exit_when_done = false;
  std::string solvers_text = "base,samp,hybrid";
  std::size_t runs = 10;
  std::string axis;
  std::string values;
  std::string name = "data";
  std::string gen_out;

  auto* resolve = app.add_subcommand("resolve", "Run one solver with a simulated or scripted human");
  add_input_options(resolve, input);
  add_solver_options(resolve, solver, true);
  resolve->add_option("--oracle", oracle, "ground-truth | transcript");
  resolve->add_option("--transcript", transcript, "CSV of pair_id,label answers");
  resolve->add_option("--journal", journal, "Append answers here; replay on restart");
  resolve->add_option("--out,-o", out_dir, "Output directory");

  auto* serve = app.add_subcommand("serve", "Run one solver with labels from the HTTP API");
  add_input_options(serve, input);
  add_solver_options(serve, solver, true);
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (ERQC_PORT overrides)");
  serve->add_option("--static", static_dir, "Labeler UI bundle directory");
  serve->add_option("--journal", journal, "Append answers here; replay on restart");
  serve->add_option("--out,-o", out_dir, "Output directory");
  serve->add_flag("--exit-when-done", exit_when_done, "Exit once the solution is written");

  auto* gen = app.add_subcommand("generate", "Write a synthetic workload CSV");
  gen->add_option("--n", spec.n_pairs, "Number of pairs");
  gen->add_option("--subset-size", spec.subset_size, "Pairs per unit subset");
  gen->add_option("--tau", spec.tau, "Logistic steepness");
  gen->add_option("--sigma", spec.sigma, "Subset proportion noise");
  gen->add_option("--seed", spec.seed, "Random seed");
  gen->add_option("--out,-o", gen_out, "Output CSV (default stdout)");

  auto* eval = app.add_subcommand("evaluate", "Repeated seeded trials and parameter sweeps");
  add_input_options(eval, input);
  add_solver_options(eval, solver, false);
  eval->add_option("--solvers", solvers_text, "Comma-separated solvers");
  eval->add_option("--runs", runs, "Trials per cell")->check(CLI::PositiveNumber);
  eval->add_option("--sweep", axis, "alpha_beta | theta | tau | sigma | size");
  eval->add_option("--values", values, "Comma-separated axis values");
  eval->add_option("--name", name, "Dataset name for figure files");
  eval->add_option("--n", spec.n_pairs, "Synthetic pairs");
  eval->add_option("--tau", spec.tau, "Synthetic steepness");
  eval->add_option("--sigma", spec.sigma, "Synthetic noise");
  eval->add_option("--out,-o", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (resolve->parsed()) return cmd_resolve(input, solver, oracle, transcript, out_dir, journal);
    if (serve->parsed()) {
      return cmd_serve(input, solver, host, port, static_dir, journal, out_dir, exit_when_done);
    }
    if (gen->parsed()) return cmd_generate(spec, gen_out);
    if (eval->parsed()) {
      spec.subset_size = input.subset_size;
      spec.seed = solver.seed;
      return cmd_evaluate(input, solver, spec, solvers_text, runs, axis, values, name, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
