#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "erqc/core.hpp"
#include "erqc/label_source.hpp"
#include "erqc/solvers.hpp"

namespace erqc {

struct ServiceOptions {
  std::string static_dir;    // labeler bundle, mounted at / when present
  std::string journal_path;  // answers are appended here and replayed on restart
  std::size_t default_batch = 10;
  // Extra display fields for a task (e.g. the two records); may be empty.
  std::function<nlohmann::json(const InstancePair&)> display;
};

/// Runs one solver against an interactive label source and exposes the
/// labeling API over HTTP:
///   GET  /api/tasks/next?limit=N
///   POST /api/labels      {pair_id, label}
///   GET  /api/progress
///   GET  /api/solution
class LabelService {
 public:
  LabelService(const Workload& workload, SolverKind solver, SolverConfig config,
               ServiceOptions options = {});
  ~LabelService();

  LabelService(const LabelService&) = delete;
  LabelService& operator=(const LabelService&) = delete;

  // Binds the listener; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Starts the solver thread.
  void start_solver();
  // Serves until stop(). bind() must have succeeded.
  void listen();
  void listen_in_background();
  // Aborts the labeling session and shuts the listener down.
  void stop();

  bool done() const;
  void wait_done() const;
  std::optional<Solution> solution() const;
  std::optional<std::string> error() const;
  LabelSource& source();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Port from ERQC_PORT when set and valid, otherwise `fallback`.
int service_port(int fallback);

}  // namespace erqc
