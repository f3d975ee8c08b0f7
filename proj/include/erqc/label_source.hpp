#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "erqc/core.hpp"

namespace erqc {

enum class SourceKind { ground_truth, interactive, scripted };

enum class Phase { idle, sampling, verification, done };

std::string_view to_string(Phase phase);

struct LabelRequest {
  std::string pair_id;
  std::size_t index = 0;
  double metric = 0.0;
  Phase phase = Phase::idle;
};

struct HumanCost {
  std::size_t count = 0;
  double fraction = 0.0;
};

enum class AnswerStatus { accepted, duplicate, rejected };

struct Progress {
  std::size_t asked = 0;
  std::size_t pending = 0;
  std::size_t total_estimate = 0;
  Phase phase = Phase::idle;
  std::optional<Partition> bounds;
};

/// Every human inspection goes through a LabelSource. Each pair is charged at
/// most once; repeated asks are served from the cache.
///
/// Ground-truth sources answer from the workload's truth column, scripted ones
/// from a fixed transcript, and interactive ones block the asking thread until
/// `answer()` is called from elsewhere (or `abort()` ends the session).
/// The referenced workload must outlive the source.
class LabelSource {
 public:
  LabelSource(const Workload& workload, SourceKind kind);
  LabelSource(const Workload& workload, std::unordered_map<std::string, Label> transcript);

  LabelSource(const LabelSource&) = delete;
  LabelSource& operator=(const LabelSource&) = delete;

  SourceKind kind() const noexcept { return kind_; }
  const Workload& workload() const noexcept { return workload_; }

  Label ask(std::size_t pair_index);
  Label ask(const InstancePair& pair);
  std::vector<Label> ask_batch(std::span<const std::size_t> pair_indices);

  std::optional<Label> cached(std::size_t pair_index) const;
  std::size_t asked_count() const;
  HumanCost human_cost() const;
  // Sorted positions of every pair charged so far.
  std::vector<std::size_t> asked_pairs() const;

  // Interactive side.
  std::vector<LabelRequest> pending(std::size_t max_count) const;
  AnswerStatus answer(std::string_view pair_id, Label label);
  void abort();
  bool aborted() const;

  // Append every fresh answer as `pair_id,label,timestamp`. Answers already in
  // the file are replayed: later asks for those pairs return immediately.
  void attach_journal(const std::string& path);

  void set_phase(Phase phase);
  void set_bounds(std::optional<Partition> bounds);
  Progress progress() const;

 private:
  Label resolve_locked(std::size_t index, std::unique_lock<std::mutex>& lock);
  void record_locked(std::size_t index, Label label, bool journal);

  const Workload& workload_;
  SourceKind kind_;
  std::unordered_map<std::string, Label> transcript_;

  mutable std::mutex mutex_;
  std::condition_variable answered_;
  std::vector<signed char> cache_;  // -1 unknown
  std::size_t asked_ = 0;
  std::deque<LabelRequest> queue_;
  std::unordered_map<std::size_t, Label> replayed_;
  std::ofstream journal_;
  bool aborted_ = false;
  Phase phase_ = Phase::idle;
  std::optional<Partition> bounds_;
};

}  // namespace erqc
