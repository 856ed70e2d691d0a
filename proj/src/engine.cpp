#include "autotrace/engine.hpp"

#include <ostream>
#include <stdexcept>

namespace autotrace {

void EngineConfig::validate() const {
  if (min_trace_length == 0) throw std::invalid_argument("min trace length must be >= 1");
  if (max_trace_length != 0 && max_trace_length < min_trace_length) {
    throw std::invalid_argument("max trace length is below the min trace length");
  }
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  if (multi_scale_factor == 0) throw std::invalid_argument("multi-scale factor must be >= 1");
  if (scoring.count_cap <= 0 || scoring.decay <= 0 || scoring.decay > 1 ||
      scoring.decay_interval <= 0 || scoring.replay_bonus < 1) {
    throw std::invalid_argument("invalid scoring parameters");
  }
}

TraceFinderConfig EngineConfig::finder() const {
  return TraceFinderConfig{batch_size, multi_scale_factor, min_trace_length, worker_count,
                           initial_wait_count};
}

ReplayerConfig EngineConfig::replayer() const {
  return ReplayerConfig{min_trace_length, max_trace_length, scoring};
}

std::string format_decision(const Decision& d) {
  std::string out = std::to_string(d.token_index) + ' ';
  switch (d.kind) {
    case Decision::Kind::submit:
      out += "submit job=" + std::to_string(d.job_id) + " slice=[" +
             std::to_string(d.slice.begin) + "," + std::to_string(d.slice.end) + ")";
      break;
    case Decision::Kind::wait:
      out += "wait job=" + std::to_string(d.job_id) + " wait_count=" + std::to_string(d.wait_count);
      break;
    case Decision::Kind::ingest:
      out += "ingest job=" + std::to_string(d.job_id) +
             " wait_count=" + std::to_string(d.wait_count);
      break;
    case Decision::Kind::begin:
      out += "tbegin " + std::to_string(d.trace) + (d.record ? " record" : " replay");
      break;
    case Decision::Kind::end:
      out += "tend " + std::to_string(d.trace);
      break;
  }
  return out;
}

void write_decision_log(std::ostream& out, const std::vector<Decision>& log) {
  for (const auto& d : log) out << format_decision(d) << '\n';
}

Engine::Engine(EngineConfig config, std::shared_ptr<WaitCountAgreement> agreement,
               LatencyHook latency)
    : config_((config.validate(), config)),
      replayer_(config_.replayer()),
      finder_(config_.finder(), std::move(agreement), std::move(latency)) {}

std::vector<AnnotatedEvent> Engine::execute(const TaskDescriptor& task) {
  const Token token = hash_task(task);
  if (auto job = finder_.on_token(token)) {
    decisions_.push_back(
        Decision{finder_.processed(), Decision::Kind::submit, job->job_id, job->slice});
  }
  for (const auto& ingested : finder_.ingest_ready_jobs()) {
    if (ingested.waited) {
      decisions_.push_back(Decision{ingested.ingested_at, Decision::Kind::wait, ingested.job_id,
                                    {}, ingested.wait_count});
    }
    decisions_.push_back(Decision{ingested.ingested_at, Decision::Kind::ingest, ingested.job_id,
                                  {}, ingested.wait_count});
    replayer_.ingest_candidates(*ingested.result, ingested.issued_at);
  }
  auto events = replayer_.push(task, token);
  log_events(events);
  return events;
}

std::vector<AnnotatedEvent> Engine::finish() {
  auto events = replayer_.flush();
  log_events(events);
  return events;
}

void Engine::log_events(const std::vector<AnnotatedEvent>& events) {
  for (const auto& e : events) {
    if (const auto* b = std::get_if<TraceBegin>(&e)) {
      Decision d;
      d.token_index = finder_.processed();
      d.kind = Decision::Kind::begin;
      d.trace = b->id;
      d.record = b->first_occurrence;
      decisions_.push_back(d);
    } else if (const auto* end = std::get_if<TraceEnd>(&e)) {
      Decision d;
      d.token_index = finder_.processed();
      d.kind = Decision::Kind::end;
      d.trace = end->id;
      decisions_.push_back(d);
    }
  }
}

AnnotatedStream run_stream(const std::vector<TaskDescriptor>& tasks, const EngineConfig& config,
                           std::vector<Decision>* decisions) {
  Engine engine(config);
  AnnotatedStream out;
  for (const auto& t : tasks) {
    auto events = engine.execute(t);
    out.insert(out.end(), std::make_move_iterator(events.begin()),
               std::make_move_iterator(events.end()));
  }
  auto tail = engine.finish();
  out.insert(out.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
  if (decisions) *decisions = engine.decisions();
  return out;
}

}  // namespace autotrace
