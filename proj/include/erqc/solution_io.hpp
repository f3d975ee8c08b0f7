#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "erqc/core.hpp"
#include "erqc/solvers.hpp"

namespace erqc {

nlohmann::json config_json(const SolverConfig& config);

// {solver, seed, exhausted, bounds, estimates, human_cost, quality?, warnings, config, labels}
nlohmann::json solution_json(const Workload& workload, const Solution& solution,
                             const SolverConfig& config);

// Partition bounds, with the metric values at the edges of D_H.
nlohmann::json partition_json(const Workload& workload, const Partition& partition);

// `id,metric,label,source` in workload order.
void write_labels_csv(std::ostream& out, const Workload& workload, const Solution& solution);

// Human-readable run summary; quality lines appear when truth is known.
std::string summary_text(const Workload& workload, const Solution& solution,
                         const SolverConfig& config);

}  // namespace erqc
