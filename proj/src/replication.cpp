#include "autotrace/replication.hpp"

#include <exception>
#include <stdexcept>
#include <thread>

#include "autotrace/stream_io.hpp"

namespace autotrace {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t first_difference(const AnnotatedStream& a, const AnnotatedStream& b) {
  std::size_t tasks = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i] != b[i]) return tasks;
    if (std::holds_alternative<TaskDescriptor>(a[i])) ++tasks;
  }
  return tasks;
}

}  // namespace

std::size_t drawn_latency(std::uint64_t seed, std::size_t node, std::uint64_t job_id,
                          std::size_t max_latency) {
  if (max_latency == 0) return 0;
  const std::uint64_t h = mix(mix(mix(seed) ^ node) ^ job_id);
  return static_cast<std::size_t>(h % (max_latency + 1));
}

ReplicationRun run_replicated(const std::vector<TaskDescriptor>& tasks, const EngineConfig& config,
                              const ReplicationConfig& replication) {
  if (replication.nodes < 2) throw std::invalid_argument("replication needs at least two nodes");
  config.validate();

  auto agreement = std::make_shared<WaitCountAgreement>(
      replication.nodes, config.initial_wait_count, config.multi_scale_factor);
  ReplicationRun run;
  run.nodes.resize(replication.nodes);
  std::vector<std::exception_ptr> errors(replication.nodes);
  {
    std::vector<std::jthread> threads;
    for (std::size_t n = 0; n < replication.nodes; ++n) {
      threads.emplace_back([&, n] {
        try {
          LatencyHook hook = replication.latency_for_node
                                 ? replication.latency_for_node(n)
                                 : LatencyHook([seed = replication.seed, n,
                                                max = replication.max_latency](std::uint64_t job) {
                                     return drawn_latency(seed, n, job, max);
                                   });
          Engine engine(config, agreement, std::move(hook));
          auto& node = run.nodes[n];
          for (const auto& t : tasks) {
            auto events = engine.execute(t);
            node.events.insert(node.events.end(), events.begin(), events.end());
          }
          auto tail = engine.finish();
          node.events.insert(node.events.end(), tail.begin(), tail.end());
          node.annotated = to_text(node.events);
          node.decisions = engine.decisions();
          node.wait_counts = engine.finder().wait_count_trajectory();
          for (const auto& d : node.decisions) {
            if (d.kind == Decision::Kind::wait) ++node.waits;
          }
        } catch (...) {
          errors[n] = std::current_exception();
        }
      });
    }
  }

  for (std::size_t n = 0; n < replication.nodes; ++n) {
    if (!errors[n]) continue;
    try {
      std::rethrow_exception(errors[n]);
    } catch (const ReplicationTimeout& e) {
      run.divergence = Divergence{n, 0, e.what()};
      return run;
    }
  }

  const auto& reference = run.nodes.front();
  for (std::size_t n = 1; n < replication.nodes; ++n) {
    const auto& node = run.nodes[n];
    if (node.annotated != reference.annotated) {
      run.divergence = Divergence{n, first_difference(reference.events, node.events),
                                  "annotated output differs from node 0"};
      return run;
    }
    if (node.wait_counts != reference.wait_counts) {
      run.divergence = Divergence{n, 0, "wait-count trajectory differs from node 0"};
      return run;
    }
  }
  return run;
}

}  // namespace autotrace
