#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "autotrace/events.hpp"
#include "autotrace/repeats.hpp"
#include "autotrace/token.hpp"

namespace autotrace {

// Half-open [begin, end) range of stream positions.
struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  auto operator<=>(const Interval&) const = default;
};

struct MatchedTrace {
  TokenString tokens;
  std::vector<Interval> intervals;
};

// A trace set together with the stream intervals each trace matches.
struct Matching {
  std::vector<MatchedTrace> traces;

  std::size_t coverage() const;
  std::size_t interval_count() const;
};

Matching matching_from_repeats(const RepeatResult& result);

// Rebuilds the matching an annotated stream encodes: one trace per id, one
// interval per begin/end pair, positions counted over tasks only. Throws
// std::invalid_argument on malformed nesting or when one id wraps two
// different sequences.
Matching matching_from_events(const AnnotatedStream& events);

// Task descriptors of the stream with the markers erased.
std::vector<TaskDescriptor> erase_markers(const AnnotatedStream& events);

// Throws std::invalid_argument on nested, unbalanced or mismatched markers.
void check_well_formed(const AnnotatedStream& events);

struct MatchingViolation {
  enum class Kind { too_short, out_of_range, content_mismatch, overlap };

  Kind kind;
  std::size_t trace = 0;
  std::size_t interval = 0;
  // For overlaps, the other offending trace and interval.
  std::size_t other_trace = 0;
  std::size_t other_interval = 0;
  std::string message;
};

std::string_view to_string(MatchingViolation::Kind kind);

// Checks minimum length, interval bounds and content, and pairwise
// disjointness; reports the first violation found in that order.
std::optional<MatchingViolation> validate_matching(const Matching& m, std::span<const Token> s,
                                                   std::size_t min_len);

class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kBruteForceLimit = 32;

/// Exhaustive optimum for small strings.
///
/// A trace must be a sub-string of length >= min_len that has two disjoint
/// occurrences in s; it may be mapped to one or more of its occurrences. The
/// result maximises coverage, then the number of matched intervals, then
/// minimises the number of distinct traces. Throws InstanceTooLarge when
/// s.size() > kBruteForceLimit.
Matching brute_force_best(std::span<const Token> s, std::size_t min_len);

struct CostParams {
  std::chrono::nanoseconds alpha{1'000'000};
  std::chrono::nanoseconds alpha_m{1'200'000};
  std::chrono::nanoseconds alpha_r{100'000};
  std::chrono::nanoseconds replay_overhead{200'000};

  void validate() const;
};

enum class ChargeKind { untraced, record, replay, replay_overhead };

std::string_view to_string(ChargeKind kind);

struct Charge {
  // Task index; a replay overhead row carries the index of the trace's first task.
  std::size_t index = 0;
  ChargeKind kind = ChargeKind::untraced;
  std::chrono::nanoseconds amount{0};
};

struct CostReport {
  std::chrono::nanoseconds total{0};
  std::size_t untraced_tasks = 0;
  std::size_t recorded_tasks = 0;
  std::size_t replayed_tasks = 0;
  std::size_t replays = 0;
  std::vector<Charge> charges;
};

// Plain tasks cost alpha, tasks in a recording cost alpha_m, tasks in a
// replay cost alpha_r, and every replay adds the constant overhead once.
CostReport simulate_cost(const AnnotatedStream& events, const CostParams& params);

std::chrono::nanoseconds untraced_cost(std::size_t tasks, const CostParams& params);

struct FractionPoint {
  std::size_t index = 0;
  double fraction = 0;
};

// For every task, the share of the last `window` tasks (fewer at the start of
// the stream) that were inside a trace.
std::vector<FractionPoint> traced_fraction_report(const AnnotatedStream& events,
                                                  std::size_t window = 5000);

void write_cost_csv(std::ostream& out, const CostReport& report);
void write_fraction_csv(std::ostream& out, const std::vector<FractionPoint>& series);

}  // namespace autotrace
