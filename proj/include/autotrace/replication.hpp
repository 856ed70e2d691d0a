#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "autotrace/engine.hpp"

namespace autotrace {

struct ReplicationConfig {
  std::size_t nodes = 4;
  std::uint64_t seed = 1;
  // Per-job simulated latency is drawn uniformly from [0, max_latency] tokens.
  std::size_t max_latency = 0;
  // Replaces the drawn latencies for a node when set; used to force waits.
  std::function<LatencyHook(std::size_t node)> latency_for_node;
};

// Latency of `job_id` on `node`, a pure function of its arguments.
std::size_t drawn_latency(std::uint64_t seed, std::size_t node, std::uint64_t job_id,
                          std::size_t max_latency);

struct NodeRun {
  AnnotatedStream events;
  std::string annotated;
  std::vector<Decision> decisions;
  std::vector<std::pair<std::uint64_t, std::size_t>> wait_counts;
  std::size_t waits = 0;
};

struct Divergence {
  std::size_t node = 0;
  // Task index at which the node's output first differs from node 0.
  std::size_t token_index = 0;
  std::string reason;
};

struct ReplicationRun {
  std::vector<NodeRun> nodes;
  std::optional<Divergence> divergence;

  bool identical() const { return !divergence; }
};

/// Runs one engine per node, each on its own thread with its own job
/// latencies, sharing a wait-count agreement. Succeeds when every node emits
/// the same annotated stream and settles the same wait counts.
ReplicationRun run_replicated(const std::vector<TaskDescriptor>& tasks, const EngineConfig& config,
                              const ReplicationConfig& replication);

}  // namespace autotrace
