#include "autotrace/trace_finder.hpp"

#include <algorithm>
#include <bit>

namespace autotrace {

unsigned ruler(std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("ruler function is defined for k >= 1");
  return static_cast<unsigned>(std::countr_zero(k));
}

std::optional<SliceRange> analysis_slice(std::size_t k, std::size_t multi_scale_factor) {
  if (multi_scale_factor == 0) throw std::invalid_argument("multi-scale factor must be >= 1");
  if (k == 0 || k % multi_scale_factor != 0) return std::nullopt;
  const std::size_t length = (std::size_t{1} << ruler(k / multi_scale_factor)) * multi_scale_factor;
  return SliceRange{k - length, k};
}

HistoryBuffer::HistoryBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("history buffer capacity must be >= 1");
  tokens_.reserve(capacity);
}

void HistoryBuffer::append(Token t) {
  if (full()) throw std::logic_error("history buffer overflow");
  tokens_.push_back(t);
  ++appended_total_;
}

WaitCountAgreement::WaitCountAgreement(std::size_t nodes, std::size_t initial, std::size_t granule,
                                       std::chrono::milliseconds timeout)
    : nodes_(nodes), granule_(granule), timeout_(timeout), settled_{initial} {
  if (nodes == 0) throw std::invalid_argument("wait-count agreement needs at least one node");
}

std::size_t WaitCountAgreement::wait_count_for(std::uint64_t job_id) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout_, [&] { return settled_.size() > job_id; })) {
    throw ReplicationTimeout("nodes did not agree on the wait count for job " +
                             std::to_string(job_id));
  }
  return settled_[job_id];
}

void WaitCountAgreement::report(std::uint64_t job_id, bool waited, std::size_t lag) {
  std::lock_guard lock(mu_);
  if (job_id + 1 < settled_.size()) throw std::logic_error("report for an already settled job");
  while (pending_base_ + pending_.size() <= job_id) pending_.emplace_back();
  auto& p = pending_[job_id - pending_base_];
  ++p.reports;
  p.any_waited = p.any_waited || waited;
  p.max_lag = std::max(p.max_lag, lag);
  while (!pending_.empty() && pending_.front().reports == nodes_) {
    const auto& done = pending_.front();
    std::size_t next = settled_.back();
    if (done.any_waited) next = std::max(next, done.max_lag) + granule_;
    settled_.push_back(next);
    pending_.pop_front();
    ++pending_base_;
  }
  cv_.notify_all();
}

WorkerPool::WorkerPool(std::size_t workers) {
  threads_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) {
    threads_.emplace_back([this](std::stop_token stop) { run(stop); });
  }
}

WorkerPool::~WorkerPool() {
  for (auto& t : threads_) t.request_stop();
  cv_.notify_all();
  threads_.clear();
}

void WorkerPool::submit(std::function<void()> work) {
  if (threads_.empty()) {
    work();
    return;
  }
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(work));
  }
  cv_.notify_one();
}

void WorkerPool::run(std::stop_token stop) {
  while (true) {
    std::function<void()> work;
    {
      std::unique_lock lock(mu_);
      if (!cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      work = std::move(queue_.front());
      queue_.pop_front();
    }
    work();
  }
}

TraceFinder::TraceFinder(TraceFinderConfig config, std::shared_ptr<WaitCountAgreement> agreement,
                         LatencyHook latency)
    : config_(config),
      agreement_(std::move(agreement)),
      latency_(std::move(latency)),
      buffer_(config.batch_size),
      known_wait_count_(config.initial_wait_count) {
  if (config_.multi_scale_factor == 0) throw std::invalid_argument("multi-scale factor must be >= 1");
  if (config_.min_trace_length == 0) throw std::invalid_argument("min trace length must be >= 1");
  if (!agreement_) {
    agreement_ = std::make_shared<WaitCountAgreement>(1, config_.initial_wait_count,
                                                      config_.multi_scale_factor);
  }
  workers_ = std::make_unique<WorkerPool>(config_.worker_count);
}

TraceFinder::~TraceFinder() = default;

std::optional<JobSubmission> TraceFinder::on_token(Token t) {
  buffer_.append(t);
  const std::size_t k = buffer_.size();
  const bool at_capacity = buffer_.full();
  std::optional<SliceRange> slice =
      at_capacity ? SliceRange{0, k} : analysis_slice(k, config_.multi_scale_factor);
  if (!slice) return std::nullopt;

  auto tokens = buffer_.tokens();
  TokenString copy(tokens.begin() + static_cast<std::ptrdiff_t>(slice->begin),
                   tokens.begin() + static_cast<std::ptrdiff_t>(slice->end));
  const std::size_t min_len = config_.min_trace_length;
  auto task = std::make_shared<std::packaged_task<std::shared_ptr<const RepeatResult>()>>(
      [copy = std::move(copy), min_len] {
        return std::make_shared<const RepeatResult>(find_repeats(copy, min_len));
      });

  Job job;
  job.job_id = next_job_id_++;
  job.issued_at = buffer_.appended_total();
  job.latency = latency_ ? latency_(job.job_id) : 0;
  job.result = task->get_future().share();
  jobs_.push_back(job);
  workers_->submit([task] { (*task)(); });

  if (at_capacity) buffer_.clear();
  return JobSubmission{job.job_id, *slice, job.issued_at};
}

std::vector<IngestedJob> TraceFinder::ingest_ready_jobs() {
  std::vector<IngestedJob> out;
  const std::uint64_t now = processed();
  while (!jobs_.empty()) {
    const Job& job = jobs_.front();
    if (!front_wait_count_) {
      // Counts never decrease, so the last settled one is a lower bound and
      // saves a round trip to the other nodes.
      if (now < job.issued_at + known_wait_count_) break;
      front_wait_count_ = agreement_->wait_count_for(job.job_id);
      known_wait_count_ = *front_wait_count_;
      trajectory_.emplace_back(job.job_id, known_wait_count_);
    }
    const std::size_t wait_count = *front_wait_count_;
    if (now < job.issued_at + wait_count) break;

    const bool waited = now < job.issued_at + job.latency;
    IngestedJob ingested;
    ingested.job_id = job.job_id;
    ingested.issued_at = job.issued_at;
    ingested.ingested_at = now;
    ingested.wait_count = wait_count;
    ingested.waited = waited;
    ingested.result = job.result.get();
    agreement_->report(job.job_id, waited, waited ? job.latency : 0);
    out.push_back(std::move(ingested));
    jobs_.pop_front();
    front_wait_count_.reset();
  }
  return out;
}

}  // namespace autotrace
