#include "autotrace/coverage.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

namespace autotrace {

std::size_t Matching::coverage() const {
  std::size_t total = 0;
  for (const auto& t : traces) {
    for (const auto& iv : t.intervals) total += iv.size();
  }
  return total;
}

std::size_t Matching::interval_count() const {
  std::size_t total = 0;
  for (const auto& t : traces) total += t.intervals.size();
  return total;
}

Matching matching_from_repeats(const RepeatResult& result) {
  Matching m;
  for (const auto& r : result.repeats) {
    MatchedTrace t;
    t.tokens = r.tokens;
    for (auto s : r.starts) t.intervals.push_back({s, s + r.length()});
    m.traces.push_back(std::move(t));
  }
  return m;
}

void check_well_formed(const AnnotatedStream& events) {
  std::optional<TraceId> open;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (const auto* b = std::get_if<TraceBegin>(&e)) {
      if (open) {
        throw std::invalid_argument("event " + std::to_string(i) + ": tbegin " +
                                    std::to_string(b->id) + " inside trace " +
                                    std::to_string(*open));
      }
      open = b->id;
      inside = 0;
    } else if (const auto* end = std::get_if<TraceEnd>(&e)) {
      if (!open || *open != end->id) {
        throw std::invalid_argument("event " + std::to_string(i) + ": unmatched tend " +
                                    std::to_string(end->id));
      }
      if (inside == 0) {
        throw std::invalid_argument("event " + std::to_string(i) + ": empty trace " +
                                    std::to_string(end->id));
      }
      open.reset();
    } else {
      const auto& task = std::get<TaskDescriptor>(e);
      if (open && task.untraceable) {
        throw std::invalid_argument("event " + std::to_string(i) + ": untraceable task " +
                                    task.task_name + " inside trace " + std::to_string(*open));
      }
      ++inside;
    }
  }
  if (open) throw std::invalid_argument("trace " + std::to_string(*open) + " is never closed");
}

Matching matching_from_events(const AnnotatedStream& events) {
  check_well_formed(events);
  Matching m;
  std::map<TraceId, std::size_t> slot;
  std::optional<TraceId> open;
  std::size_t begin = 0;
  std::size_t position = 0;
  TokenString body;
  for (const auto& e : events) {
    if (const auto* b = std::get_if<TraceBegin>(&e)) {
      open = b->id;
      begin = position;
      body.clear();
    } else if (const auto* end = std::get_if<TraceEnd>(&e)) {
      auto [it, inserted] = slot.try_emplace(end->id, m.traces.size());
      if (inserted) {
        m.traces.push_back(MatchedTrace{body, {}});
      } else if (m.traces[it->second].tokens != body) {
        throw std::invalid_argument("trace " + std::to_string(end->id) +
                                    " wraps two different task sequences");
      }
      m.traces[it->second].intervals.push_back({begin, position});
      open.reset();
    } else {
      if (open) body.push_back(hash_task(std::get<TaskDescriptor>(e)));
      ++position;
    }
  }
  return m;
}

std::vector<TaskDescriptor> erase_markers(const AnnotatedStream& events) {
  std::vector<TaskDescriptor> tasks;
  for (const auto& e : events) {
    if (const auto* t = std::get_if<TaskDescriptor>(&e)) tasks.push_back(*t);
  }
  return tasks;
}

std::string_view to_string(MatchingViolation::Kind kind) {
  switch (kind) {
    case MatchingViolation::Kind::too_short:
      return "too_short";
    case MatchingViolation::Kind::out_of_range:
      return "out_of_range";
    case MatchingViolation::Kind::content_mismatch:
      return "content_mismatch";
    case MatchingViolation::Kind::overlap:
      return "overlap";
  }
  return "unknown";
}

std::optional<MatchingViolation> validate_matching(const Matching& m, std::span<const Token> s,
                                                   std::size_t min_len) {
  using Kind = MatchingViolation::Kind;
  for (std::size_t t = 0; t < m.traces.size(); ++t) {
    const auto& trace = m.traces[t];
    if (trace.tokens.size() < min_len) {
      return MatchingViolation{Kind::too_short, t, 0, 0, 0,
                               "trace " + std::to_string(t) + " has length " +
                                   std::to_string(trace.tokens.size()) + " < " +
                                   std::to_string(min_len)};
    }
    for (std::size_t i = 0; i < trace.intervals.size(); ++i) {
      const auto& iv = trace.intervals[i];
      if (iv.begin >= iv.end || iv.end > s.size()) {
        return MatchingViolation{Kind::out_of_range, t, i, 0, 0,
                                 "trace " + std::to_string(t) + " interval [" +
                                     std::to_string(iv.begin) + ", " + std::to_string(iv.end) +
                                     ") is outside the string"};
      }
      if (iv.size() != trace.tokens.size() ||
          !std::equal(trace.tokens.begin(), trace.tokens.end(), s.begin() + iv.begin)) {
        return MatchingViolation{Kind::content_mismatch, t, i, 0, 0,
                                 "trace " + std::to_string(t) + " interval [" +
                                     std::to_string(iv.begin) + ", " + std::to_string(iv.end) +
                                     ") does not spell the trace"};
      }
    }
  }

  struct Placed {
    Interval iv;
    std::size_t trace;
    std::size_t interval;
  };
  std::vector<Placed> all;
  for (std::size_t t = 0; t < m.traces.size(); ++t) {
    for (std::size_t i = 0; i < m.traces[t].intervals.size(); ++i) {
      all.push_back({m.traces[t].intervals[i], t, i});
    }
  }
  std::sort(all.begin(), all.end(), [](const Placed& a, const Placed& b) { return a.iv < b.iv; });
  for (std::size_t k = 1; k < all.size(); ++k) {
    if (all[k].iv.begin < all[k - 1].iv.end) {
      const auto& a = all[k - 1];
      const auto& b = all[k];
      return MatchingViolation{Kind::overlap, a.trace, a.interval, b.trace, b.interval,
                               "interval [" + std::to_string(a.iv.begin) + ", " +
                                   std::to_string(a.iv.end) + ") of trace " +
                                   std::to_string(a.trace) + " overlaps [" +
                                   std::to_string(b.iv.begin) + ", " + std::to_string(b.iv.end) +
                                   ") of trace " + std::to_string(b.trace)};
    }
  }
  return std::nullopt;
}

namespace {

struct Score {
  std::size_t coverage = 0;
  std::size_t intervals = 0;

  auto operator<=>(const Score&) const = default;
};

class BruteForce {
 public:
  BruteForce(std::span<const Token> s, std::size_t min_len) : s_(s), n_(s.size()) {
    // eligible_[i][len] is the id of s[i, i + len) when it has two disjoint
    // occurrences, else -1.
    std::map<TokenString, int> ids;
    eligible_.assign(n_, std::vector<int>(n_ + 1, -1));
    for (std::size_t len = std::max<std::size_t>(min_len, 1); 2 * len <= n_; ++len) {
      for (std::size_t i = 0; i + len <= n_; ++i) {
        bool repeated = false;
        for (std::size_t j = 0; j + len <= n_ && !repeated; ++j) {
          if (j + len > i && i + len > j) continue;
          repeated = std::equal(s.begin() + i, s.begin() + i + len, s.begin() + j);
        }
        if (!repeated) continue;
        TokenString key(s.begin() + i, s.begin() + i + len);
        auto [it, inserted] = ids.try_emplace(std::move(key), static_cast<int>(texts_.size()));
        if (inserted) texts_.push_back(it->first);
        eligible_[i][len] = it->second;
      }
    }

    best_.assign(n_ + 1, Score{});
    for (std::size_t i = n_; i-- > 0;) {
      Score b = best_[i + 1];
      for (std::size_t len = 1; i + len <= n_; ++len) {
        if (eligible_[i][len] < 0) continue;
        Score c{best_[i + len].coverage + len, best_[i + len].intervals + 1};
        b = std::max(b, c);
      }
      best_[i] = b;
    }
    use_count_.assign(texts_.size(), 0);
  }

  Matching solve() {
    best_distinct_ = texts_.size() + 1;
    search(0, 0);
    Matching m;
    std::map<int, std::size_t> slot;
    for (const auto& [id, iv] : best_choice_) {
      auto [it, inserted] = slot.try_emplace(id, m.traces.size());
      if (inserted) m.traces.push_back(MatchedTrace{texts_[id], {}});
      m.traces[it->second].intervals.push_back(iv);
    }
    return m;
  }

 private:
  // Only follows choices that keep the optimal (coverage, intervals) score
  // reachable, minimising the number of distinct traces along the way.
  void search(std::size_t i, std::size_t distinct) {
    if (distinct >= best_distinct_) return;
    if (i == n_) {
      best_distinct_ = distinct;
      best_choice_ = choice_;
      return;
    }
    for (std::size_t len = n_ - i; len >= 1; --len) {
      const int id = eligible_[i][len];
      if (id < 0) continue;
      Score c{best_[i + len].coverage + len, best_[i + len].intervals + 1};
      if (c != best_[i]) continue;
      const bool fresh = use_count_[id]++ == 0;
      choice_.push_back({id, Interval{i, i + len}});
      search(i + len, distinct + (fresh ? 1 : 0));
      choice_.pop_back();
      --use_count_[id];
    }
    if (best_[i + 1] == best_[i]) search(i + 1, distinct);
  }

  std::span<const Token> s_;
  std::size_t n_;
  std::vector<std::vector<int>> eligible_;
  std::vector<TokenString> texts_;
  std::vector<Score> best_;
  std::vector<std::size_t> use_count_;
  std::vector<std::pair<int, Interval>> choice_;
  std::vector<std::pair<int, Interval>> best_choice_;
  std::size_t best_distinct_ = 0;
};

}  // namespace

Matching brute_force_best(std::span<const Token> s, std::size_t min_len) {
  if (s.size() > kBruteForceLimit) {
    throw InstanceTooLarge("brute-force search is limited to " +
                           std::to_string(kBruteForceLimit) + " tokens, got " +
                           std::to_string(s.size()));
  }
  if (min_len == 0) throw std::invalid_argument("minimum trace length must be at least 1");
  return BruteForce(s, min_len).solve();
}

void CostParams::validate() const {
  if (!(alpha_r < alpha && alpha <= alpha_m)) {
    throw std::invalid_argument("cost parameters must satisfy alpha_r < alpha <= alpha_m");
  }
  if (replay_overhead.count() < 0) throw std::invalid_argument("replay overhead must be >= 0");
}

std::string_view to_string(ChargeKind kind) {
  switch (kind) {
    case ChargeKind::untraced:
      return "untraced";
    case ChargeKind::record:
      return "record";
    case ChargeKind::replay:
      return "replay";
    case ChargeKind::replay_overhead:
      return "replay_overhead";
  }
  return "unknown";
}

CostReport simulate_cost(const AnnotatedStream& events, const CostParams& params) {
  check_well_formed(events);
  CostReport report;
  std::optional<ChargeKind> mode;
  std::size_t index = 0;
  auto charge = [&](ChargeKind kind, std::chrono::nanoseconds amount) {
    report.charges.push_back(Charge{index, kind, amount});
    report.total += amount;
  };
  for (const auto& e : events) {
    if (const auto* b = std::get_if<TraceBegin>(&e)) {
      if (b->first_occurrence) {
        mode = ChargeKind::record;
      } else {
        mode = ChargeKind::replay;
        ++report.replays;
        charge(ChargeKind::replay_overhead, params.replay_overhead);
      }
    } else if (std::holds_alternative<TraceEnd>(e)) {
      mode.reset();
    } else {
      if (!mode) {
        ++report.untraced_tasks;
        charge(ChargeKind::untraced, params.alpha);
      } else if (*mode == ChargeKind::record) {
        ++report.recorded_tasks;
        charge(ChargeKind::record, params.alpha_m);
      } else {
        ++report.replayed_tasks;
        charge(ChargeKind::replay, params.alpha_r);
      }
      ++index;
    }
  }
  return report;
}

std::chrono::nanoseconds untraced_cost(std::size_t tasks, const CostParams& params) {
  return params.alpha * static_cast<std::int64_t>(tasks);
}

std::vector<FractionPoint> traced_fraction_report(const AnnotatedStream& events,
                                                  std::size_t window) {
  if (window == 0) throw std::invalid_argument("fraction window must be >= 1");
  std::vector<std::uint8_t> traced;
  bool inside = false;
  for (const auto& e : events) {
    if (std::holds_alternative<TraceBegin>(e)) {
      inside = true;
    } else if (std::holds_alternative<TraceEnd>(e)) {
      inside = false;
    } else {
      traced.push_back(inside ? 1 : 0);
    }
  }
  std::vector<FractionPoint> series;
  series.reserve(traced.size());
  std::size_t in_window = 0;
  for (std::size_t i = 0; i < traced.size(); ++i) {
    in_window += traced[i];
    if (i >= window) in_window -= traced[i - window];
    const std::size_t span = std::min(window, i + 1);
    series.push_back({i, static_cast<double>(in_window) / static_cast<double>(span)});
  }
  return series;
}

void write_cost_csv(std::ostream& out, const CostReport& report) {
  out << "index,kind,charge\n";
  char buf[64];
  for (const auto& c : report.charges) {
    const auto ns = c.amount.count();
    std::snprintf(buf, sizeof buf, "%lld.%09lld", static_cast<long long>(ns / 1'000'000'000),
                  static_cast<long long>(ns % 1'000'000'000));
    out << c.index << ',' << to_string(c.kind) << ',' << buf << '\n';
  }
}

void write_fraction_csv(std::ostream& out, const std::vector<FractionPoint>& series) {
  out << "index,fraction\n";
  char buf[32];
  for (const auto& p : series) {
    std::snprintf(buf, sizeof buf, "%.6f", p.fraction);
    out << p.index << ',' << buf << '\n';
  }
}

}  // namespace autotrace
