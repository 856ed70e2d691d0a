#include <doctest.h>

#include "autotrace/coverage.hpp"
#include "autotrace/engine.hpp"
#include "autotrace/generators.hpp"
#include "autotrace/replication.hpp"
#include "autotrace/repeats.hpp"

using namespace autotrace;

namespace {

std::vector<TaskDescriptor> generated(GeneratorKind kind, std::size_t iterations, std::size_t period = 6) {
  GeneratorSpec spec;
  spec.kind = kind;
  spec.iterations = iterations;
  spec.period = period;
  return generate(spec);
}

EngineConfig small_engine() {
  EngineConfig c;
  c.min_trace_length = 6;
  c.multi_scale_factor = 12;
  c.batch_size = 384;
  return c;
}

}  // namespace

TEST_CASE("generator kinds parse") {
  for (auto k : {GeneratorKind::jacobi, GeneratorKind::periodic, GeneratorKind::periodic_with_noise,
                 GeneratorKind::nested_loops, GeneratorKind::random}) {
    CHECK(parse_generator_kind(to_string(k)) == k);
  }
  CHECK_FALSE(parse_generator_kind("fibonacci").has_value());
}

TEST_CASE("invalid generator specs are refused") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::periodic;
  spec.period = 0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.period = 3;
  spec.noise_rate = 1.5;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.kind = GeneratorKind::random;
  spec.alphabet = 0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
}

TEST_CASE("periodic generator") {
  const auto tasks = generated(GeneratorKind::periodic, 2, 3);
  REQUIRE(tasks.size() == 6);
  const auto s = tokenize_stream(tasks);
  for (std::size_t i = 0; i + 3 < s.size(); ++i) CHECK(s[i] == s[i + 3]);
  CHECK(s[0] != s[1]);
}

TEST_CASE("nested loops generator") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::nested_loops;
  spec.iterations = 3;
  spec.period = 2;
  spec.inner_repeats = 4;
  CHECK(generate(spec).size() == 3 * (2 + 8));
}

TEST_CASE("noise generator is reproducible and noisy") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::periodic_with_noise;
  spec.period = 30;
  spec.iterations = 1000;
  spec.noise_rate = 1.0 / 200;
  const auto a = generate(spec);
  CHECK(a == generate(spec));
  const auto extra = a.size() - 30000;
  CHECK(extra > 100);
  CHECK(extra < 200);
  spec.seed = 2;
  CHECK(generate(spec) != a);
}

TEST_CASE("random stream yields no traces") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::random;
  spec.alphabet = 50;
  spec.length = 1000;
  const auto tasks = generate(spec);
  CHECK(find_repeats(tokenize_stream(tasks), 25).empty());
  const auto events = run_stream(tasks, EngineConfig{});
  CHECK(matching_from_events(events).traces.empty());
  CHECK(events.size() == tasks.size());
}

TEST_CASE("engine edge cases") {
  CHECK(run_stream({}, EngineConfig{}).empty());
  const auto short_stream = generated(GeneratorKind::periodic, 1, 40);
  const auto events = run_stream(short_stream, EngineConfig{});
  CHECK(erase_markers(events) == short_stream);
  CHECK(matching_from_events(events).traces.empty());

  EngineConfig bad;
  bad.max_trace_length = 10;
  CHECK_THROWS_AS(Engine{bad}, std::invalid_argument);
  bad = EngineConfig{};
  bad.scoring.decay = 0;
  CHECK_THROWS_AS(Engine{bad}, std::invalid_argument);
}

TEST_CASE("engine decision log") {
  std::vector<Decision> decisions;
  run_stream(generated(GeneratorKind::jacobi, 100), small_engine(), &decisions);
  REQUIRE_FALSE(decisions.empty());
  CHECK(decisions.front().kind == Decision::Kind::submit);
  CHECK(format_decision(decisions.front()) == "12 submit job=0 slice=[0,12)");
  bool saw_begin = false;
  for (std::size_t i = 1; i < decisions.size(); ++i) {
    CHECK(decisions[i].token_index >= decisions[i - 1].token_index);
    saw_begin = saw_begin || decisions[i].kind == Decision::Kind::begin;
  }
  CHECK(saw_begin);
}

TEST_CASE("max trace length bounds emitted traces") {
  auto config = small_engine();
  config.max_trace_length = 8;
  const auto tasks = generated(GeneratorKind::periodic, 200, 5);
  const auto m = matching_from_events(run_stream(tasks, config));
  REQUIRE_FALSE(m.traces.empty());
  for (const auto& t : m.traces) {
    CHECK(t.tokens.size() >= 6);
    CHECK(t.tokens.size() <= 8);
  }
}

TEST_CASE("untraceable tasks are never traced") {
  auto tasks = generated(GeneratorKind::periodic, 200, 7);
  for (std::size_t i = 3; i < tasks.size(); i += 40) tasks[i].untraceable = true;
  const auto events = run_stream(tasks, small_engine());
  CHECK_NOTHROW(check_well_formed(events));
  CHECK(erase_markers(events) == tasks);
  CHECK_FALSE(matching_from_events(events).traces.empty());
}

TEST_CASE("replication") {
  const auto tasks = generated(GeneratorKind::jacobi, 300);
  SUBCASE("two nodes without latency") {
    ReplicationConfig r;
    r.nodes = 2;
    const auto run = run_replicated(tasks, small_engine(), r);
    CHECK(run.identical());
    CHECK(run.nodes[0].waits == 0);
    CHECK(run.nodes[0].annotated == run.nodes[1].annotated);
  }
  SUBCASE("four nodes with random latencies") {
    ReplicationConfig r;
    r.nodes = 4;
    r.max_latency = 40;
    r.seed = 5;
    const auto run = run_replicated(tasks, small_engine(), r);
    CHECK(run.identical());
  }
  SUBCASE("one slow node makes every node raise its wait count") {
    ReplicationConfig r;
    r.nodes = 2;
    r.latency_for_node = [](std::size_t node) -> LatencyHook {
      return [node](std::uint64_t job) { return node == 1 && job == 3 ? std::size_t{30} : 0; };
    };
    const auto run = run_replicated(tasks, small_engine(), r);
    CHECK(run.identical());
    CHECK(run.nodes[0].waits == 0);
    CHECK(run.nodes[1].waits == 1);
    for (const auto& node : run.nodes) {
      REQUIRE(node.wait_counts.size() > 5);
      CHECK(node.wait_counts[3].second == 0);
      CHECK(node.wait_counts[4].second == 42);
      CHECK(node.wait_counts.back().second == 42);
    }
  }
  SUBCASE("a single node is refused") {
    ReplicationConfig r;
    r.nodes = 1;
    CHECK_THROWS_AS(run_replicated(tasks, small_engine(), r), std::invalid_argument);
  }
}

TEST_CASE("drawn latencies are reproducible and bounded") {
  for (std::uint64_t job = 0; job < 100; ++job) {
    CHECK(drawn_latency(3, 1, job, 50) == drawn_latency(3, 1, job, 50));
    CHECK(drawn_latency(3, 1, job, 50) <= 50);
    CHECK(drawn_latency(3, 1, job, 0) == 0);
  }
}
