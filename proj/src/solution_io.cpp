#include "erqc/solution_io.hpp"

#include <ostream>
#include <sstream>

#include "erqc/csv.hpp"
#include "erqc/metrics.hpp"
#include "erqc/workload_io.hpp"

namespace erqc {
namespace {

nlohmann::json optional_index(std::optional<std::size_t> v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json config_json(const SolverConfig& c) {
  nlohmann::json j = {{"alpha", c.requirement.alpha},
                      {"beta", c.requirement.beta},
                      {"theta", c.requirement.theta},
                      {"base_window", c.base_window},
                      {"sample_low", c.sample_low},
                      {"sample_high", c.sample_high},
                      {"epsilon", c.epsilon},
                      {"sample_size", c.sample_size},
                      {"signal_variance", c.kernel.signal_variance},
                      {"length_scale", c.kernel.length_scale},
                      {"hyper", c.hyper == gp::HyperPolicy::grid_search ? "grid" : "fixed"},
                      {"seed", c.seed}};
  j["noise_variance"] = c.noise_variance ? nlohmann::json(*c.noise_variance) : nlohmann::json(nullptr);
  j["initial_subset"] = optional_index(c.initial_subset);
  j["initial_metric"] = c.initial_metric ? nlohmann::json(*c.initial_metric) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json partition_json(const Workload& w, const Partition& p) {
  nlohmann::json j = {{"human_begin", p.human_begin()},
                      {"human_end", p.human_end()},
                      {"subset_count", p.subset_count()}};
  j["lower_subset"] = optional_index(p.lower_subset());
  j["upper_subset"] = optional_index(p.upper_subset());
  const PairRange h = p.human_pairs(w);
  j["human_pairs"] = h.size();
  j["minus_pairs"] = p.minus_pairs(w).size();
  j["plus_pairs"] = p.plus_pairs(w).size();
  if (!h.empty()) {
    j["v_minus"] = w.pair(h.begin).metric;
    j["v_plus"] = w.pair(h.end - 1).metric;
  }
  return j;
}

nlohmann::json solution_json(const Workload& w, const Solution& s, const SolverConfig& config) {
  nlohmann::json j;
  j["solver"] = to_string(s.solver);
  j["seed"] = s.seed;
  j["exhausted"] = s.exhausted;
  j["bounds"] = partition_json(w, s.partition);
  j["estimates"] = {{"matches_plus_lb", s.bounds.matches_plus_lb},
                    {"matches_minus_ub", s.bounds.matches_minus_ub},
                    {"matches_human", s.bounds.matches_human},
                    {"plus_provenance", to_string(s.bounds.plus_provenance)},
                    {"minus_provenance", to_string(s.bounds.minus_provenance)}};
  const double n = static_cast<double>(w.size());
  j["human_cost"] = {{"count", s.human_cost()},
                     {"fraction", n > 0 ? static_cast<double>(s.human_cost()) / n : 0.0}};
  if (w.has_truth() && s.labels.complete()) {
    j["quality"] = {{"precision", precision(w, s.labels).value}, {"recall", recall(w, s.labels).value}};
  }
  j["warnings"] = s.warnings;
  j["config"] = config_json(config);
  auto& labels = j["labels"] = nlohmann::json::array();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto l = s.labels.label(i);
    labels.push_back({{"id", w.pair(i).id},
                      {"label", l ? nlohmann::json(to_string(*l)) : nlohmann::json(nullptr)},
                      {"source", to_string(s.labels.origin(i))}});
  }
  return j;
}

void write_labels_csv(std::ostream& out, const Workload& w, const Solution& s) {
  out << "id,metric,label,source\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto l = s.labels.label(i);
    out << csv::escape(w.pair(i).id) << ',' << format_double(w.pair(i).metric) << ','
        << (l ? to_string(*l) : "") << ',' << to_string(s.labels.origin(i)) << '\n';
  }
}

std::string summary_text(const Workload& w, const Solution& s, const SolverConfig& c) {
  std::ostringstream out;
  const double n = static_cast<double>(w.size());
  out << "solver: " << to_string(s.solver) << "\n";
  out << "requirement: alpha=" << c.requirement.alpha << " beta=" << c.requirement.beta
      << " theta=" << c.requirement.theta << "\n";
  out << "pairs: " << w.size() << " in " << w.subset_count() << " subsets\n";
  out << "human subsets: [" << s.partition.human_begin() << ", " << s.partition.human_end()
      << ")\n";
  out << "human cost: " << s.human_cost() << " pairs (psi="
      << (n > 0 ? static_cast<double>(s.human_cost()) / n : 0.0) << ")\n";
  if (w.has_truth() && s.labels.complete()) {
    out << "achieved precision: " << precision(w, s.labels).value << "\n";
    out << "achieved recall: " << recall(w, s.labels).value << "\n";
  }
  if (s.exhausted) out << "exhausted: requirements could only be met by labeling everything\n";
  for (const auto& warning : s.warnings) out << "warning: " << warning << "\n";
  return out.str();
}

}  // namespace erqc
