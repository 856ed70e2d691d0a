#include "autotrace/trace_replayer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace autotrace {

double score(const TraceInfo& trace, std::uint64_t now, const ScoreParams& params) {
  const double count = std::min(static_cast<double>(trace.count), params.count_cap);
  const double age = now > trace.last_seen ? static_cast<double>(now - trace.last_seen) : 0.0;
  double s = static_cast<double>(trace.length) * count *
             std::pow(params.decay, age / params.decay_interval);
  if (trace.replayed) s *= params.replay_bonus;
  return s;
}

CandidateTrie::CandidateTrie() { nodes_.emplace_back(); }

TraceId CandidateTrie::insert(std::span<const Token> path, std::uint64_t count,
                              std::uint64_t seen_at) {
  if (path.empty()) throw std::invalid_argument("cannot insert an empty trace");
  const auto length = static_cast<std::uint32_t>(path.size());
  std::uint32_t node = kRoot;
  nodes_[node].max_terminal = std::max(nodes_[node].max_terminal, length);
  for (Token t : path) {
    auto [it, inserted] = edges_.try_emplace(EdgeKey{node, t.value}, 0);
    if (inserted) {
      Node n;
      n.parent = node;
      n.depth = nodes_[node].depth + 1;
      n.label = t;
      it->second = static_cast<std::uint32_t>(nodes_.size());
      ++nodes_[node].children;
      nodes_.push_back(n);
    }
    node = it->second;
    nodes_[node].max_terminal = std::max(nodes_[node].max_terminal, length);
  }

  auto& end = nodes_[node];
  if (end.terminal) {
    auto& info = traces_[*end.terminal];
    info.count = std::max(info.count, count);
    info.last_seen = std::max(info.last_seen, seen_at);
    return info.id;
  }
  const auto id = static_cast<TraceId>(traces_.size());
  end.terminal = id;
  traces_.push_back(TraceInfo{id, path.size(), count, seen_at, false});
  trace_nodes_.push_back(node);
  return id;
}

std::optional<std::uint32_t> CandidateTrie::child(std::uint32_t node, Token t) const {
  auto it = edges_.find(EdgeKey{node, t.value});
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

std::optional<TraceId> CandidateTrie::find(std::span<const Token> path) const {
  std::uint32_t node = kRoot;
  for (Token t : path) {
    auto next = child(node, t);
    if (!next) return std::nullopt;
    node = *next;
  }
  return nodes_[node].terminal;
}

TokenString CandidateTrie::path_of(TraceId id) const {
  TokenString path;
  for (std::uint32_t node = trace_nodes_.at(id); node != kRoot; node = nodes_[node].parent) {
    path.push_back(nodes_[node].label);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<std::span<const Token>> trace_pieces(std::span<const Token> repeat,
                                                 std::size_t min_len, std::size_t max_len) {
  std::vector<std::span<const Token>> pieces;
  std::size_t i = 0;
  while (i < repeat.size()) {
    while (i < repeat.size() && repeat[i].untraceable()) ++i;
    std::size_t j = i;
    while (j < repeat.size() && !repeat[j].untraceable()) ++j;
    for (std::size_t at = i; at < j;) {
      const std::size_t len = max_len == 0 ? j - at : std::min(max_len, j - at);
      if (len >= min_len) pieces.push_back(repeat.subspan(at, len));
      at += len;
    }
    i = j;
  }
  return pieces;
}

TraceReplayer::TraceReplayer(ReplayerConfig config) : config_(config) {
  if (config_.min_trace_length == 0) throw std::invalid_argument("min trace length must be >= 1");
  if (config_.max_trace_length != 0 && config_.max_trace_length < config_.min_trace_length) {
    throw std::invalid_argument("max trace length is below the min trace length");
  }
}

void TraceReplayer::ingest_candidates(const RepeatResult& result, std::uint64_t seen_at) {
  for (const auto& r : result.repeats) {
    for (auto piece : trace_pieces(r.tokens, config_.min_trace_length, config_.max_trace_length)) {
      trie_.insert(piece, r.starts.size(), seen_at);
    }
  }
}

double TraceReplayer::score_of(TraceId id) const {
  return score(trie_.trace(id), next_index_, config_.scoring);
}

std::vector<AnnotatedEvent> TraceReplayer::push(const TaskDescriptor& task, Token token) {
  std::vector<AnnotatedEvent> out;
  const std::uint64_t index = next_index_++;
  pending_.push_back(Pending{task, index});
  advance(token, index);
  resolve(out, false);
  release(out);
  return out;
}

std::vector<AnnotatedEvent> TraceReplayer::flush() {
  std::vector<AnnotatedEvent> out;
  pointers_.clear();
  resolve(out, true);
  emit_plain_before(next_index_, out);
  completed_.clear();
  return out;
}

void TraceReplayer::advance(Token token, std::uint64_t index) {
  scratch_.clear();
  if (!token.untraceable()) {
    for (const auto& p : pointers_) {
      if (auto next = trie_.child(p.node, token)) scratch_.push_back(Pointer{*next, p.start});
    }
    if (auto first = trie_.child(CandidateTrie::kRoot, token)) {
      scratch_.push_back(Pointer{*first, index});
    }
  }
  pointers_.swap(scratch_);

  for (const auto& p : pointers_) {
    if (auto id = trie_.terminal(p.node)) {
      auto& info = trie_.trace(*id);
      ++info.count;
      info.last_seen = index + 1;
      completed_.push_back(Completion{*id, p.start, index + 1});
    }
  }
  std::erase_if(pointers_, [&](const Pointer& p) { return !trie_.has_children(p.node); });
}

void TraceReplayer::resolve(std::vector<AnnotatedEvent>& out, bool at_end) {
  while (!completed_.empty()) {
    const Completion* best = nullptr;
    double best_score = 0;
    for (const auto& c : completed_) {
      const double s = score(trie_.trace(c.id), next_index_, config_.scoring);
      if (best == nullptr || s > best_score ||
          (s == best_score && (c.id < best->id || (c.id == best->id && c.start < best->start)))) {
        best = &c;
        best_score = s;
      }
    }
    const Completion chosen = *best;

    // Hold the choice while an overlapping pointer can still complete a longer
    // trace, unless the oldest pending task has already waited as long as the
    // deepest trace.
    const bool overdue =
        !pending_.empty() &&
        pending_.front().index + trie_.max_terminal_depth(CandidateTrie::kRoot) <= next_index_;
    if (!at_end && !overdue) {
      const auto length = static_cast<std::uint32_t>(chosen.end - chosen.start);
      const bool in_flight = std::any_of(pointers_.begin(), pointers_.end(), [&](const Pointer& p) {
        return p.start < chosen.end && trie_.max_terminal_depth(p.node) > length;
      });
      if (in_flight) return;
    }
    emit_trace(chosen, out);
    drop_starting_before(chosen.end);
  }
}

void TraceReplayer::emit_plain_before(std::uint64_t index, std::vector<AnnotatedEvent>& out) {
  while (!pending_.empty() && pending_.front().index < index) {
    out.emplace_back(std::move(pending_.front().task));
    pending_.pop_front();
  }
}

void TraceReplayer::emit_trace(const Completion& c, std::vector<AnnotatedEvent>& out) {
  emit_plain_before(c.start, out);
  if (pending_.empty() || pending_.front().index != c.start) {
    throw std::logic_error("matched tasks are no longer pending");
  }
  auto& info = trie_.trace(c.id);
  out.emplace_back(TraceBegin{c.id, !info.replayed});
  info.replayed = true;
  while (!pending_.empty() && pending_.front().index < c.end) {
    out.emplace_back(std::move(pending_.front().task));
    pending_.pop_front();
  }
  out.emplace_back(TraceEnd{c.id});
}

void TraceReplayer::drop_starting_before(std::uint64_t index) {
  std::erase_if(pointers_, [&](const Pointer& p) { return p.start < index; });
  std::erase_if(completed_, [&](const Completion& c) { return c.start < index; });
}

void TraceReplayer::release(std::vector<AnnotatedEvent>& out) {
  std::uint64_t boundary = next_index_;
  for (const auto& p : pointers_) boundary = std::min(boundary, p.start);
  for (const auto& c : completed_) boundary = std::min(boundary, c.start);
  emit_plain_before(boundary, out);
}

}  // namespace autotrace
