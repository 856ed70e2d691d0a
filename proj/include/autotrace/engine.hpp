#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "autotrace/events.hpp"
#include "autotrace/trace_finder.hpp"
#include "autotrace/trace_replayer.hpp"

namespace autotrace {

struct EngineConfig {
  std::size_t min_trace_length = 25;
  std::size_t max_trace_length = 0;  // 0 = unbounded
  std::size_t batch_size = 5000;
  std::size_t multi_scale_factor = 250;
  std::size_t worker_count = 1;
  std::size_t initial_wait_count = 0;
  ScoreParams scoring;

  // Throws std::invalid_argument.
  void validate() const;
  TraceFinderConfig finder() const;
  ReplayerConfig replayer() const;
};

struct Decision {
  enum class Kind { submit, ingest, wait, begin, end };

  // Number of tasks the application had issued when the decision was made.
  std::uint64_t token_index = 0;
  Kind kind = Kind::submit;
  std::uint64_t job_id = 0;
  SliceRange slice;
  std::size_t wait_count = 0;
  TraceId trace = 0;
  bool record = false;

  bool operator==(const Decision&) const = default;
};

std::string format_decision(const Decision& d);
void write_decision_log(std::ostream& out, const std::vector<Decision>& log);

/// One node's interception layer: every task is hashed, fed to the trace
/// finder, and then to the replayer after any results whose barrier has been
/// reached are ingested.
class Engine {
 public:
  explicit Engine(EngineConfig config, std::shared_ptr<WaitCountAgreement> agreement = nullptr,
                  LatencyHook latency = nullptr);

  // Events that became final while processing this task.
  std::vector<AnnotatedEvent> execute(const TaskDescriptor& task);
  std::vector<AnnotatedEvent> finish();

  const std::vector<Decision>& decisions() const { return decisions_; }
  const TraceFinder& finder() const { return finder_; }
  const TraceReplayer& replayer() const { return replayer_; }
  const EngineConfig& config() const { return config_; }

 private:
  void log_events(const std::vector<AnnotatedEvent>& events);

  EngineConfig config_;
  TraceReplayer replayer_;
  std::vector<Decision> decisions_;
  TraceFinder finder_;
};

// Runs a whole stream through a fresh engine.
AnnotatedStream run_stream(const std::vector<TaskDescriptor>& tasks, const EngineConfig& config,
                           std::vector<Decision>* decisions = nullptr);

}  // namespace autotrace
