#include <doctest.h>

#include <thread>

#include "autotrace/trace_finder.hpp"
#include "oracles.hpp"

using namespace autotrace;

namespace {

TraceFinderConfig small_config(std::size_t batch, std::size_t granule, std::size_t wait = 0) {
  TraceFinderConfig c;
  c.batch_size = batch;
  c.multi_scale_factor = granule;
  c.min_trace_length = 1;
  c.worker_count = 0;
  c.initial_wait_count = wait;
  return c;
}

std::vector<SliceRange> slices_for(TraceFinder& finder, std::size_t tokens) {
  std::vector<SliceRange> out;
  for (std::size_t i = 0; i < tokens; ++i) {
    if (auto job = finder.on_token(Token{i % 7})) out.push_back(job->slice);
    finder.ingest_ready_jobs();
  }
  return out;
}

}  // namespace

TEST_CASE("ruler function") {
  CHECK(ruler(1) == 0);
  CHECK(ruler(2) == 1);
  CHECK(ruler(3) == 0);
  CHECK(ruler(4) == 2);
  CHECK(ruler(12) == 2);
  for (unsigned j = 0; j < 63; ++j) CHECK(ruler(std::uint64_t{1} << j) == j);
  CHECK_THROWS_AS(ruler(0), std::invalid_argument);
}

TEST_CASE("analysis slices") {
  CHECK(analysis_slice(4, 1) == SliceRange{0, 4});
  CHECK(analysis_slice(3, 1) == SliceRange{2, 3});
  CHECK(analysis_slice(1000, 250) == SliceRange{0, 1000});
  CHECK(analysis_slice(750, 250) == SliceRange{500, 750});
  CHECK_FALSE(analysis_slice(251, 250).has_value());
  CHECK_FALSE(analysis_slice(0, 250).has_value());
  for (std::size_t k = 1; k <= 4096; ++k) {
    const auto s = analysis_slice(k, 1);
    REQUIRE(s.has_value());
    REQUIRE(s->end == k);
    REQUIRE(s->size() == std::size_t{1} << ruler(k));
  }
}

TEST_CASE("history buffer") {
  HistoryBuffer b(3);
  CHECK_THROWS_AS(HistoryBuffer(0), std::invalid_argument);
  b.append(Token{1});
  b.append(Token{2});
  CHECK(b.size() == 2);
  CHECK_FALSE(b.full());
  b.append(Token{3});
  CHECK(b.full());
  CHECK_THROWS_AS(b.append(Token{4}), std::logic_error);
  b.clear();
  CHECK(b.size() == 0);
  CHECK(b.appended_total() == 3);
}

TEST_CASE("submission schedule") {
  SUBCASE("B=8, C=1") {
    TraceFinder finder(small_config(8, 1));
    CHECK(slices_for(finder, 8) ==
          std::vector<SliceRange>{{0, 1}, {0, 2}, {2, 3}, {0, 4}, {4, 5}, {4, 6}, {6, 7}, {0, 8}});
    CHECK(finder.buffer().size() == 0);
  }
  SUBCASE("fewer than C tokens submit nothing") {
    TraceFinder finder(small_config(5000, 250));
    CHECK(slices_for(finder, 249).empty());
  }
  SUBCASE("2C tokens") {
    TraceFinder finder(small_config(5000, 250));
    CHECK(slices_for(finder, 500) == std::vector<SliceRange>{{0, 250}, {0, 500}});
  }
  SUBCASE("a full buffer is mined whole and cleared") {
    TraceFinder finder(small_config(1000, 250));
    const auto slices = slices_for(finder, 1250);
    CHECK(slices == std::vector<SliceRange>{{0, 250}, {0, 500}, {500, 750}, {0, 1000}, {0, 250}});
    CHECK(finder.buffer().size() == 250);
  }
  SUBCASE("buffer size that is not a power-of-two multiple of C") {
    TraceFinder finder(small_config(750, 250));
    CHECK(slices_for(finder, 750) == std::vector<SliceRange>{{0, 250}, {0, 500}, {0, 750}});
    CHECK(finder.buffer().size() == 0);
  }
}

TEST_CASE("buffer holds the tokens since the last clear") {
  TraceFinder finder(small_config(16, 4));
  TokenString all;
  for (std::uint64_t i = 0; i < 50; ++i) {
    finder.on_token(Token{i});
    all.push_back(Token{i});
    const auto held = finder.buffer().tokens();
    REQUIRE(held.size() <= 16);
    REQUIRE(std::equal(held.begin(), held.end(), all.end() - static_cast<std::ptrdiff_t>(held.size())));
  }
}

TEST_CASE("ingestion barrier") {
  SUBCASE("instant jobs land exactly wait_count tokens after issue") {
    TraceFinder finder(small_config(5000, 10, 7));
    std::vector<IngestedJob> ingested;
    for (std::uint64_t i = 0; i < 100; ++i) {
      finder.on_token(Token{i % 3});
      for (auto& j : finder.ingest_ready_jobs()) ingested.push_back(j);
    }
    REQUIRE_FALSE(ingested.empty());
    for (const auto& j : ingested) {
      CHECK(j.ingested_at == j.issued_at + 7);
      CHECK_FALSE(j.waited);
      CHECK(j.result != nullptr);
    }
  }
  SUBCASE("jobs issued near the end are never ingested") {
    TraceFinder finder(small_config(5000, 10, 50));
    std::size_t count = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
      finder.on_token(Token{i});
      count += finder.ingest_ready_jobs().size();
    }
    CHECK(count == 0);
    CHECK(finder.pending_jobs() == 2);
  }
  SUBCASE("a slow job raises the wait count for the following jobs") {
    TraceFinder finder(small_config(5000, 10), nullptr,
                       [](std::uint64_t job) { return job == 1 ? std::size_t{25} : 0; });
    std::vector<IngestedJob> ingested;
    for (std::uint64_t i = 0; i < 120; ++i) {
      finder.on_token(Token{i % 4});
      for (auto& j : finder.ingest_ready_jobs()) ingested.push_back(j);
    }
    REQUIRE(ingested.size() >= 4);
    CHECK(ingested[0].wait_count == 0);
    CHECK(ingested[1].wait_count == 0);
    CHECK(ingested[1].waited);
    CHECK(ingested[2].wait_count == 35);
    CHECK(ingested[2].ingested_at == ingested[2].issued_at + 35);
    for (std::size_t i = 2; i < ingested.size(); ++i) CHECK(ingested[i].wait_count == 35);
  }
}

TEST_CASE("wait count is monotone and ingestion follows submission order") {
  std::mt19937_64 rng(23);
  TraceFinder finder(small_config(400, 10), nullptr,
                     [&rng](std::uint64_t) { return static_cast<std::size_t>(rng() % 60); });
  std::uint64_t expected = 0;
  for (std::uint64_t i = 0; i < 3000; ++i) {
    finder.on_token(Token{rng() % 3});
    for (const auto& j : finder.ingest_ready_jobs()) REQUIRE(j.job_id == expected++);
  }
  const auto& trajectory = finder.wait_count_trajectory();
  REQUIRE(trajectory.size() > 10);
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    REQUIRE(trajectory[i].first == trajectory[i - 1].first + 1);
    REQUIRE(trajectory[i].second >= trajectory[i - 1].second);
  }
  CHECK(trajectory.back().second >= 60);
}

TEST_CASE("decisions do not depend on real mining time") {
  auto run = [](std::size_t workers) {
    auto config = small_config(500, 10);
    config.worker_count = workers;
    TraceFinder finder(config);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> log;
    std::mt19937_64 rng(29);
    for (std::uint64_t i = 0; i < 2000; ++i) {
      finder.on_token(Token{rng() % 5});
      for (const auto& j : finder.ingest_ready_jobs()) log.emplace_back(j.ingested_at, j.job_id);
    }
    return log;
  };
  const auto inline_run = run(0);
  CHECK(run(1) == inline_run);
  CHECK(run(3) == inline_run);
}

TEST_CASE("mined slices come from the submitted copy") {
  auto config = small_config(64, 8);
  config.min_trace_length = 2;
  TraceFinder finder(config);
  TokenString s;
  for (int rep = 0; rep < 8; ++rep) {
    for (std::uint64_t t : {1, 2, 3, 4}) s.push_back(Token{t});
  }
  for (auto t : s) finder.on_token(t);
  const auto jobs = finder.ingest_ready_jobs();
  REQUIRE(jobs.size() == 4);
  // Job 3 covers [0, 32): the whole periodic prefix.
  CHECK(coverage_of(*jobs[3].result) == 32);
}

TEST_CASE("wait-count agreement across nodes") {
  WaitCountAgreement agreement(2, 0, 10, std::chrono::milliseconds(2000));
  CHECK(agreement.wait_count_for(0) == 0);
  agreement.report(0, false, 0);
  std::size_t seen = 0;
  std::jthread other([&] { seen = agreement.wait_count_for(1); });
  agreement.report(0, true, 42);
  other.join();
  CHECK(seen == 52);
  agreement.report(1, false, 0);
  agreement.report(1, false, 0);
  CHECK(agreement.wait_count_for(2) == 52);
}

TEST_CASE("a missing node times out") {
  WaitCountAgreement agreement(2, 0, 10, std::chrono::milliseconds(50));
  agreement.report(0, false, 0);
  CHECK_THROWS_AS(agreement.wait_count_for(1), ReplicationTimeout);
}
