#include "erqc/label_source.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "erqc/csv.hpp"
#include "erqc/errors.hpp"

namespace erqc {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::idle: return "idle";
    case Phase::sampling: return "sampling";
    case Phase::verification: return "verification";
    case Phase::done: return "done";
  }
  return "unknown";
}

LabelSource::LabelSource(const Workload& workload, SourceKind kind)
    : workload_(workload), kind_(kind), cache_(workload.size(), -1) {
  if (kind == SourceKind::scripted) {
    throw ConfigError("scripted label sources need a transcript");
  }
}

LabelSource::LabelSource(const Workload& workload, std::unordered_map<std::string, Label> transcript)
    : workload_(workload),
      kind_(SourceKind::scripted),
      transcript_(std::move(transcript)),
      cache_(workload.size(), -1) {}

std::optional<Label> LabelSource::cached(std::size_t pair_index) const {
  std::lock_guard lock(mutex_);
  const signed char c = cache_.at(pair_index);
  if (c < 0) return std::nullopt;
  return static_cast<Label>(c);
}

std::size_t LabelSource::asked_count() const {
  std::lock_guard lock(mutex_);
  return asked_;
}

HumanCost LabelSource::human_cost() const {
  std::lock_guard lock(mutex_);
  const double n = static_cast<double>(workload_.size());
  return {asked_, n > 0 ? static_cast<double>(asked_) / n : 0.0};
}

std::vector<std::size_t> LabelSource::asked_pairs() const {
  std::lock_guard lock(mutex_);
  std::vector<std::size_t> out;
  out.reserve(asked_);
  for (std::size_t i = 0; i < cache_.size(); ++i) {
    if (cache_[i] >= 0) out.push_back(i);
  }
  return out;
}

void LabelSource::record_locked(std::size_t index, Label label, bool journal) {
  cache_[index] = static_cast<signed char>(label);
  ++asked_;
  if (journal && journal_.is_open()) {
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    journal_ << csv::escape(workload_.pair(index).id) << ',' << to_string(label) << ',' << now
             << '\n';
    journal_.flush();
  }
}

Label LabelSource::resolve_locked(std::size_t index, std::unique_lock<std::mutex>& lock) {
  if (cache_[index] >= 0) return static_cast<Label>(cache_[index]);

  if (auto it = replayed_.find(index); it != replayed_.end()) {
    record_locked(index, it->second, false);
    return it->second;
  }

  const InstancePair& pair = workload_.pair(index);
  switch (kind_) {
    case SourceKind::ground_truth: {
      if (!pair.truth) throw ContractViolation("pair '" + pair.id + "' has no ground truth");
      record_locked(index, *pair.truth, true);
      return *pair.truth;
    }
    case SourceKind::scripted: {
      auto it = transcript_.find(pair.id);
      if (it == transcript_.end()) throw AbortError("transcript has no answer for '" + pair.id + "'");
      record_locked(index, it->second, true);
      return it->second;
    }
    case SourceKind::interactive: {
      if (aborted_) throw AbortError("labeling session aborted");
      const bool queued = std::any_of(queue_.begin(), queue_.end(),
                                      [&](const LabelRequest& r) { return r.index == index; });
      if (!queued) queue_.push_back({pair.id, index, pair.metric, phase_});
      answered_.wait(lock, [&] { return cache_[index] >= 0 || aborted_; });
      if (cache_[index] < 0) throw AbortError("labeling session aborted");
      return static_cast<Label>(cache_[index]);
    }
  }
  throw Error("unknown label source kind");
}

Label LabelSource::ask(std::size_t pair_index) {
  if (pair_index >= workload_.size()) throw ContractViolation("pair index out of range");
  std::unique_lock lock(mutex_);
  return resolve_locked(pair_index, lock);
}

Label LabelSource::ask(const InstancePair& pair) {
  const auto index = workload_.index_of(pair.id);
  if (!index) throw ContractViolation("pair '" + pair.id + "' is not in the workload");
  return ask(*index);
}

std::vector<Label> LabelSource::ask_batch(std::span<const std::size_t> pair_indices) {
  for (std::size_t i : pair_indices) {
    if (i >= workload_.size()) throw ContractViolation("pair index out of range");
  }
  std::unique_lock lock(mutex_);
  if (kind_ == SourceKind::interactive) {
    // Queue the whole batch before blocking so the human sees all of it.
    for (std::size_t i : pair_indices) {
      if (cache_[i] >= 0) continue;
      if (auto it = replayed_.find(i); it != replayed_.end()) {
        record_locked(i, it->second, false);
        continue;
      }
      const bool queued = std::any_of(queue_.begin(), queue_.end(),
                                      [&](const LabelRequest& r) { return r.index == i; });
      if (!queued) queue_.push_back({workload_.pair(i).id, i, workload_.pair(i).metric, phase_});
    }
  }
  std::vector<Label> out;
  out.reserve(pair_indices.size());
  for (std::size_t i : pair_indices) out.push_back(resolve_locked(i, lock));
  return out;
}

std::vector<LabelRequest> LabelSource::pending(std::size_t max_count) const {
  std::lock_guard lock(mutex_);
  const std::size_t n = std::min(max_count, queue_.size());
  return {queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(n)};
}

AnswerStatus LabelSource::answer(std::string_view pair_id, Label label) {
  const auto index = workload_.index_of(pair_id);
  if (!index) return AnswerStatus::rejected;
  std::lock_guard lock(mutex_);
  if (cache_[*index] >= 0) {
    return static_cast<Label>(cache_[*index]) == label ? AnswerStatus::duplicate
                                                       : AnswerStatus::rejected;
  }
  auto it = std::find_if(queue_.begin(), queue_.end(),
                         [&](const LabelRequest& r) { return r.index == *index; });
  if (it == queue_.end()) return AnswerStatus::rejected;
  queue_.erase(it);
  record_locked(*index, label, true);
  answered_.notify_all();
  return AnswerStatus::accepted;
}

void LabelSource::abort() {
  {
    std::lock_guard lock(mutex_);
    aborted_ = true;
  }
  answered_.notify_all();
}

bool LabelSource::aborted() const {
  std::lock_guard lock(mutex_);
  return aborted_;
}

void LabelSource::attach_journal(const std::string& path) {
  std::lock_guard lock(mutex_);
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row_stream("h1,h2,h3\n" + line + "\n");
        const csv::Table row = csv::read(row_stream, path);
        if (row.rows.empty() || row.rows[0].fields.size() < 2) {
          throw ParseError(path, line_no, "journal lines are pair_id,label,timestamp");
        }
        const auto& fields = row.rows[0].fields;
        const auto index = workload_.index_of(fields[0]);
        if (!index) throw ParseError(path, line_no, "unknown pair '" + fields[0] + "'");
        const auto label = parse_label(fields[1]);
        if (!label) throw ParseError(path, line_no, "bad label '" + fields[1] + "'");
        replayed_[*index] = *label;
      }
    }
  }
  journal_.open(path, std::ios::app | std::ios::binary);
  if (!journal_) throw Error("cannot open journal '" + path + "'");
}

void LabelSource::set_phase(Phase phase) {
  std::lock_guard lock(mutex_);
  phase_ = phase;
}

void LabelSource::set_bounds(std::optional<Partition> bounds) {
  std::lock_guard lock(mutex_);
  bounds_ = bounds;
}

Progress LabelSource::progress() const {
  std::lock_guard lock(mutex_);
  Progress p;
  p.asked = asked_;
  p.pending = queue_.size();
  p.phase = phase_;
  p.bounds = bounds_;
  p.total_estimate = asked_ + queue_.size();
  if (bounds_) {
    const PairRange human = bounds_->human_pairs(workload_);
    std::size_t unasked = 0;
    for (std::size_t i = human.begin; i < human.end; ++i) {
      if (cache_[i] < 0) ++unasked;
    }
    p.total_estimate = std::max(p.total_estimate, asked_ + unasked);
  }
  return p;
}

}  // namespace erqc
