#include "erqc/service.hpp"

#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "erqc/errors.hpp"
#include "erqc/solution_io.hpp"

namespace erqc {
namespace {

nlohmann::json progress_json(const Workload& w, const Progress& p) {
  nlohmann::json j = {{"asked", p.asked},
                      {"pending", p.pending},
                      {"total_estimate", p.total_estimate},
                      {"phase", to_string(p.phase)}};
  j["current_bounds"] = p.bounds ? partition_json(w, *p.bounds) : nlohmann::json(nullptr);
  return j;
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::optional<Label> label_from_json(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>() ? Label::match : Label::unmatch;
  if (v.is_number_integer()) {
    const auto i = v.get<long long>();
    if (i == 0 || i == 1) return static_cast<Label>(i);
    return std::nullopt;
  }
  if (v.is_string()) return parse_label(v.get<std::string>());
  return std::nullopt;
}

}  // namespace

struct LabelService::Impl {
  Impl(const Workload& w, SolverKind k, SolverConfig c, ServiceOptions o)
      : workload(w), kind(k), config(std::move(c)), options(std::move(o)),
        source(w, SourceKind::interactive) {}

  const Workload& workload;
  SolverKind kind;
  SolverConfig config;
  ServiceOptions options;
  LabelSource source;
  httplib::Server server;
  std::thread solver_thread;
  std::thread http_thread;

  mutable std::mutex mutex;
  mutable std::condition_variable finished;
  bool done = false;
  std::optional<Solution> solution;
  std::optional<std::string> error;

  void routes();
};

void LabelService::Impl::routes() {
  server.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
    std::size_t limit = options.default_batch;
    if (req.has_param("limit")) {
      try {
        limit = static_cast<std::size_t>(std::stoul(req.get_param_value("limit")));
      } catch (const std::exception&) {
        send_json(res, 400, {{"error", "limit must be a non-negative integer"}});
        return;
      }
    }
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& r : source.pending(limit)) {
      nlohmann::json t = {{"pair_id", r.pair_id}, {"metric", r.metric}, {"phase", to_string(r.phase)}};
      if (options.display) t["records"] = options.display(workload.pair(r.index));
      tasks.push_back(std::move(t));
    }
    const Progress p = source.progress();
    send_json(res, 200, {{"tasks", tasks}, {"phase", to_string(p.phase)}});
  });

  server.Post("/api/labels", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      send_json(res, 400, {{"error", "body is not JSON"}});
      return;
    }
    if (!body.is_object() || !body.contains("pair_id") || !body["pair_id"].is_string() ||
        !body.contains("label")) {
      send_json(res, 400, {{"error", "expected {pair_id, label}"}});
      return;
    }
    const auto label = label_from_json(body["label"]);
    if (!label) {
      send_json(res, 400, {{"error", "label must be match or unmatch"}});
      return;
    }
    const auto id = body["pair_id"].get<std::string>();
    const AnswerStatus status = source.answer(id, *label);
    const auto progress = progress_json(workload, source.progress());
    switch (status) {
      case AnswerStatus::accepted:
        send_json(res, 200, {{"status", "accepted"}, {"progress", progress}});
        return;
      case AnswerStatus::duplicate:
        send_json(res, 200, {{"status", "duplicate"}, {"progress", progress}});
        return;
      case AnswerStatus::rejected:
        send_json(res, 409, {{"status", "rejected"},
                             {"error", "pair '" + id + "' is unknown, not pending, or already labeled differently"}});
        return;
    }
  });

  server.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, progress_json(workload, source.progress()));
  });

  server.Get("/api/solution", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mutex);
    if (error) {
      send_json(res, 500, {{"error", *error}, {"phase", to_string(source.progress().phase)}});
    } else if (!solution) {
      send_json(res, 404, {{"error", "solution not ready"}, {"phase", to_string(source.progress().phase)}});
    } else {
      send_json(res, 200, solution_json(workload, *solution, config));
    }
  });

  if (!options.static_dir.empty() && std::filesystem::is_directory(options.static_dir)) {
    server.set_mount_point("/", options.static_dir);
  }
}

LabelService::LabelService(const Workload& workload, SolverKind solver, SolverConfig config,
                           ServiceOptions options)
    : impl_(std::make_unique<Impl>(workload, solver, std::move(config), std::move(options))) {
  impl_->config.validate();
  if (!impl_->options.journal_path.empty()) impl_->source.attach_journal(impl_->options.journal_path);
  impl_->routes();
}

LabelService::~LabelService() { stop(); }

int LabelService::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void LabelService::start_solver() {
  if (impl_->solver_thread.joinable()) throw ContractViolation("solver already started");
  impl_->solver_thread = std::thread([impl = impl_.get()] {
    std::optional<Solution> s;
    std::optional<std::string> err;
    try {
      s = solve(impl->kind, impl->workload, impl->config, impl->source);
    } catch (const std::exception& e) {
      err = e.what();
    }
    std::lock_guard lock(impl->mutex);
    impl->solution = std::move(s);
    impl->error = std::move(err);
    impl->done = true;
    impl->finished.notify_all();
  });
}

void LabelService::listen() { impl_->server.listen_after_bind(); }

void LabelService::listen_in_background() {
  impl_->http_thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void LabelService::stop() {
  if (!impl_) return;
  impl_->source.abort();
  impl_->server.stop();
  if (impl_->solver_thread.joinable()) impl_->solver_thread.join();
  if (impl_->http_thread.joinable()) impl_->http_thread.join();
}

bool LabelService::done() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->done;
}

void LabelService::wait_done() const {
  std::unique_lock lock(impl_->mutex);
  impl_->finished.wait(lock, [&] { return impl_->done; });
}

std::optional<Solution> LabelService::solution() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->solution;
}

std::optional<std::string> LabelService::error() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->error;
}

LabelSource& LabelService::source() { return impl_->source; }

int service_port(int fallback) {
  if (const char* env = std::getenv("ERQC_PORT")) {
    try {
      const int p = std::stoi(env);
      if (p > 0 && p < 65536) return p;
    } catch (const std::exception&) {
    }
  }
  return fallback;
}

}  // namespace erqc
