#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "autotrace/events.hpp"
#include "autotrace/repeats.hpp"
#include "autotrace/token.hpp"

namespace autotrace {

struct ScoreParams {
  double count_cap = 100;
  // The count is multiplied by decay once per decay_interval tokens since the
  // trace was last seen.
  double decay = 0.99;
  double decay_interval = 100;
  double replay_bonus = 1.1;
};

struct TraceInfo {
  TraceId id = 0;
  std::size_t length = 0;
  std::uint64_t count = 0;
  std::uint64_t last_seen = 0;
  bool replayed = false;
};

double score(const TraceInfo& trace, std::uint64_t now, const ScoreParams& params);

// Candidate traces keyed token by token. A trace may end on an inner node
// when it is a prefix of a longer one.
class CandidateTrie {
 public:
  static constexpr std::uint32_t kRoot = 0;

  CandidateTrie();

  // Returns the existing id for a known sequence. New traces start with the
  // given count; known ones take the larger count and the later last_seen.
  TraceId insert(std::span<const Token> path, std::uint64_t count, std::uint64_t seen_at);

  std::optional<std::uint32_t> child(std::uint32_t node, Token t) const;
  std::optional<TraceId> terminal(std::uint32_t node) const { return nodes_[node].terminal; }
  bool has_children(std::uint32_t node) const { return nodes_[node].children > 0; }
  std::uint32_t depth(std::uint32_t node) const { return nodes_[node].depth; }
  // Deepest trace end at or below node; 0 when there is none.
  std::uint32_t max_terminal_depth(std::uint32_t node) const { return nodes_[node].max_terminal; }

  std::optional<TraceId> find(std::span<const Token> path) const;
  TokenString path_of(TraceId id) const;

  TraceInfo& trace(TraceId id) { return traces_.at(id); }
  const TraceInfo& trace(TraceId id) const { return traces_.at(id); }
  std::size_t trace_count() const { return traces_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::uint32_t parent = 0;
    std::uint32_t depth = 0;
    std::uint32_t children = 0;
    std::uint32_t max_terminal = 0;
    Token label{};
    std::optional<TraceId> terminal;
  };

  struct EdgeKey {
    std::uint32_t node;
    std::uint64_t token;
    bool operator==(const EdgeKey&) const = default;
  };

  struct EdgeHash {
    std::size_t operator()(const EdgeKey& k) const noexcept {
      return static_cast<std::size_t>(k.token ^ (std::uint64_t{k.node} * 0x9e3779b97f4a7c15ULL));
    }
  };

  std::vector<Node> nodes_;
  std::unordered_map<EdgeKey, std::uint32_t, EdgeHash> edges_;
  std::vector<TraceInfo> traces_;
  std::vector<std::uint32_t> trace_nodes_;
};

// Splits a repeat into trie-ready pieces: cut at untraceable tokens, then
// into consecutive chunks of at most max_len (0 = unbounded); pieces shorter
// than min_len are dropped.
std::vector<std::span<const Token>> trace_pieces(std::span<const Token> repeat,
                                                 std::size_t min_len, std::size_t max_len);

struct ReplayerConfig {
  std::size_t min_trace_length = 25;
  std::size_t max_trace_length = 0;  // 0 = unbounded
  ScoreParams scoring;
};

/// Matches the task stream against the candidate trie and rewrites it with
/// trace markers.
///
/// Every token spawns a pointer at the root; pointers step along the trie and
/// die when the next token has no edge. A pointer on a trace end yields a
/// completed match. The best-scoring completed match is emitted unless a live
/// pointer from the same start can still reach a longer trace, in which case
/// the choice waits for it (and everything before that start is released).
/// A task leaves the pending queue once no pointer or completed match
/// starting at or before it remains, so no task waits longer than the
/// deepest trace in the trie.
class TraceReplayer {
 public:
  explicit TraceReplayer(ReplayerConfig config);

  // Inserts every piece of every repeat. seen_at is the token index at which
  // the analysed history ended.
  void ingest_candidates(const RepeatResult& result, std::uint64_t seen_at);

  // Processes one task; returns the events that became final.
  std::vector<AnnotatedEvent> push(const TaskDescriptor& task, Token token);

  // Drops partial matches, emits completed ones and releases every pending task.
  std::vector<AnnotatedEvent> flush();

  double score_of(TraceId id) const;

  const CandidateTrie& trie() const { return trie_; }
  std::size_t pending_size() const { return pending_.size(); }
  std::size_t active_pointers() const { return pointers_.size(); }
  std::uint64_t processed() const { return next_index_; }

 private:
  struct Pending {
    TaskDescriptor task;
    std::uint64_t index;
  };
  struct Pointer {
    std::uint32_t node;
    std::uint64_t start;
  };
  struct Completion {
    TraceId id;
    std::uint64_t start;
    std::uint64_t end;
  };

  void advance(Token token, std::uint64_t index);
  void resolve(std::vector<AnnotatedEvent>& out, bool at_end);
  void emit_plain_before(std::uint64_t index, std::vector<AnnotatedEvent>& out);
  void emit_trace(const Completion& c, std::vector<AnnotatedEvent>& out);
  void drop_starting_before(std::uint64_t index);
  void release(std::vector<AnnotatedEvent>& out);

  ReplayerConfig config_;
  CandidateTrie trie_;
  std::deque<Pending> pending_;
  std::vector<Pointer> pointers_;
  std::vector<Pointer> scratch_;
  std::vector<Completion> completed_;
  std::uint64_t next_index_ = 0;
};

}  // namespace autotrace
