#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "autotrace/repeats.hpp"
#include "autotrace/token.hpp"

namespace autotrace {

// 2-adic valuation: how many times k divides evenly by two. k >= 1.
unsigned ruler(std::uint64_t k);

struct SliceRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const SliceRange&) const = default;
};

// Buffer positions to mine after the k-th token since the last clear, or
// nothing when k is not a multiple of the multi-scale factor. The slice is
// the last 2^ruler(k / factor) * factor tokens.
std::optional<SliceRange> analysis_slice(std::size_t k, std::size_t multi_scale_factor);

class HistoryBuffer {
 public:
  explicit HistoryBuffer(std::size_t capacity);

  void append(Token t);
  void clear() { tokens_.clear(); }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return tokens_.size(); }
  bool full() const { return tokens_.size() == capacity_; }
  std::uint64_t appended_total() const { return appended_total_; }
  std::span<const Token> tokens() const { return tokens_; }

 private:
  std::size_t capacity_;
  std::uint64_t appended_total_ = 0;
  TokenString tokens_;
};

class ReplicationTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The count of processed tokens that every node waits before ingesting an
/// analysis result.
///
/// Job j is ingested once processed >= issued_at + wait_count_for(j). Each
/// node reports whether it had to stall on job j; if any node did, the count
/// for job j + 1 becomes max(count, largest reported lag) + granule. With a
/// single node this never blocks. With several, wait_count_for(j) blocks until
/// every node has reported job j - 1, which makes the trajectory identical on
/// all of them.
class WaitCountAgreement {
 public:
  WaitCountAgreement(std::size_t nodes, std::size_t initial, std::size_t granule,
                     std::chrono::milliseconds timeout = std::chrono::seconds(60));

  std::size_t wait_count_for(std::uint64_t job_id);
  void report(std::uint64_t job_id, bool waited, std::size_t lag);

  std::size_t nodes() const { return nodes_; }

 private:
  struct Pending {
    std::size_t reports = 0;
    bool any_waited = false;
    std::size_t max_lag = 0;
  };

  const std::size_t nodes_;
  const std::size_t granule_;
  const std::chrono::milliseconds timeout_;
  std::mutex mu_;
  std::condition_variable cv_;
  // settled_[j] is the wait count that applies to job j.
  std::vector<std::size_t> settled_;
  std::deque<Pending> pending_;
  std::uint64_t pending_base_ = 0;
};

class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  // Runs inline when the pool has no workers.
  void submit(std::function<void()> work);
  std::size_t size() const { return threads_.size(); }

 private:
  void run(std::stop_token stop);

  std::mutex mu_;
  std::condition_variable_any cv_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::jthread> threads_;
};

struct JobSubmission {
  std::uint64_t job_id = 0;
  SliceRange slice;
  std::uint64_t issued_at = 0;
};

struct IngestedJob {
  std::uint64_t job_id = 0;
  std::uint64_t issued_at = 0;
  std::uint64_t ingested_at = 0;
  std::size_t wait_count = 0;
  bool waited = false;
  std::shared_ptr<const RepeatResult> result;
};

// Simulated completion delay of a job, in processed tokens after submission.
using LatencyHook = std::function<std::size_t(std::uint64_t job_id)>;

struct TraceFinderConfig {
  std::size_t batch_size = 5000;
  std::size_t multi_scale_factor = 250;
  std::size_t min_trace_length = 25;
  std::size_t worker_count = 1;
  std::size_t initial_wait_count = 0;
};

/// Token history plus the asynchronous repeat-mining jobs run over it.
///
/// Whether a job is "complete" is judged on the simulated latency clock, in
/// processed tokens, never on wall time: a node that reaches a job's
/// deadline before its simulated completion records a wait. The real mining
/// still runs on the worker pool and is joined at ingestion, so decisions
/// depend only on the token stream, the configuration and the latency hook.
class TraceFinder {
 public:
  explicit TraceFinder(TraceFinderConfig config,
                       std::shared_ptr<WaitCountAgreement> agreement = nullptr,
                       LatencyHook latency = nullptr);
  ~TraceFinder();

  TraceFinder(const TraceFinder&) = delete;
  TraceFinder& operator=(const TraceFinder&) = delete;

  // Appends the token; submits a job when a slice is due and clears the
  // buffer after the full-buffer analysis.
  std::optional<JobSubmission> on_token(Token t);

  // Jobs whose barrier has been reached, in submission order. Call once per
  // processed token after on_token.
  std::vector<IngestedJob> ingest_ready_jobs();

  std::uint64_t processed() const { return buffer_.appended_total(); }
  const HistoryBuffer& buffer() const { return buffer_; }
  std::size_t pending_jobs() const { return jobs_.size(); }
  const TraceFinderConfig& config() const { return config_; }

  // (job id, wait count) each time a job's count was settled.
  const std::vector<std::pair<std::uint64_t, std::size_t>>& wait_count_trajectory() const {
    return trajectory_;
  }

 private:
  struct Job {
    std::uint64_t job_id;
    std::uint64_t issued_at;
    std::size_t latency;
    std::shared_future<std::shared_ptr<const RepeatResult>> result;
  };

  TraceFinderConfig config_;
  std::shared_ptr<WaitCountAgreement> agreement_;
  LatencyHook latency_;
  HistoryBuffer buffer_;
  std::deque<Job> jobs_;
  std::uint64_t next_job_id_ = 0;
  std::size_t known_wait_count_;
  std::optional<std::size_t> front_wait_count_;
  std::vector<std::pair<std::uint64_t, std::size_t>> trajectory_;
  // Declared last: destroyed first, so workers stop before the state above.
  std::unique_ptr<WorkerPool> workers_;
};

}  // namespace autotrace
