#include <doctest.h>

#include <random>

#include "autotrace/coverage.hpp"
#include "autotrace/stream_io.hpp"
#include "autotrace/trace_replayer.hpp"
#include "oracles.hpp"

using namespace autotrace;

namespace {

ReplayerConfig config(std::size_t min_len, std::size_t max_len = 0) {
  ReplayerConfig c;
  c.min_trace_length = min_len;
  c.max_trace_length = max_len;
  return c;
}

RepeatResult repeats_of(std::initializer_list<std::string_view> texts, std::size_t copies = 2) {
  RepeatResult r;
  for (auto text : texts) {
    Repeat rep;
    rep.tokens = tokens_from_chars(text);
    for (std::size_t i = 0; i < copies; ++i) rep.starts.push_back(i * 1000);
    r.repeats.push_back(std::move(rep));
  }
  return r;
}

// Lower-case letters are ordinary tasks, '!' is untraceable.
TaskDescriptor task_for(char c) {
  return TaskDescriptor{std::string(1, c), {{"r", {"f"}, Privilege::read, {}}}, c == '!'};
}

Token token_for(char c) {
  Token t{static_cast<std::uint64_t>(static_cast<unsigned char>(c))};
  if (c == '!') t.value |= Token::kUntraceableBit;
  return t;
}

struct Feed {
  AnnotatedStream events;
  // Output size after each push, for checking when events become final.
  std::vector<std::size_t> sizes;
};

Feed feed(TraceReplayer& r, std::string_view text, bool flush = true) {
  Feed out;
  for (char c : text) {
    auto ev = r.push(task_for(c), token_for(c));
    out.events.insert(out.events.end(), ev.begin(), ev.end());
    out.sizes.push_back(out.events.size());
  }
  if (flush) {
    auto tail = r.flush();
    out.events.insert(out.events.end(), tail.begin(), tail.end());
  }
  return out;
}

// "a[b c]d" style rendering; trace ids are omitted.
std::string render(const AnnotatedStream& events) {
  std::string out;
  for (const auto& e : events) {
    if (const auto* t = std::get_if<TaskDescriptor>(&e)) {
      out += t->task_name;
    } else if (std::holds_alternative<TraceBegin>(e)) {
      out += '[';
    } else {
      out += ']';
    }
  }
  return out;
}

}  // namespace

TEST_CASE("score") {
  ScoreParams p;
  CHECK(score(TraceInfo{0, 6, 1, 10, false}, 10, p) == doctest::Approx(6.0));
  CHECK(score(TraceInfo{0, 6, 10, 0, false}, 0, p) == score(TraceInfo{1, 6, 1000000, 0, false}, 0, p) / 10);
  ScoreParams capped;
  capped.count_cap = 10;
  CHECK(score(TraceInfo{0, 6, 10, 0, false}, 0, capped) ==
        score(TraceInfo{1, 6, 1000000, 0, false}, 0, capped));
  CHECK(score(TraceInfo{0, 6, 3, 0, true}, 0, p) > score(TraceInfo{0, 6, 3, 0, false}, 0, p));
  CHECK(score(TraceInfo{0, 6, 3, 0, false}, 100, p) == doctest::Approx(18 * 0.99));
  CHECK(score(TraceInfo{0, 6, 3, 0, false}, 700, p) <
        score(TraceInfo{0, 6, 3, 600, false}, 700, p));
}

TEST_CASE("trace pieces") {
  const auto long_repeat = tokens_from_chars(std::string(450, 'a'));
  std::vector<std::size_t> sizes;
  for (auto piece : trace_pieces(long_repeat, 25, 200)) sizes.push_back(piece.size());
  CHECK(sizes == std::vector<std::size_t>{200, 200, 50});

  CHECK(trace_pieces(tokens_from_chars("abcdef"), 1, 0).size() == 1);

  TokenString split = tokens_from_chars("abcdefgh");
  split[3].value |= Token::kUntraceableBit;
  sizes.clear();
  for (auto piece : trace_pieces(split, 3, 0)) sizes.push_back(piece.size());
  CHECK(sizes == std::vector<std::size_t>{3, 4});

  sizes.clear();
  for (auto piece : trace_pieces(tokens_from_chars(std::string(230, 'a')), 25, 200)) {
    sizes.push_back(piece.size());
  }
  CHECK(sizes == std::vector<std::size_t>{200, 30});
  CHECK(trace_pieces(tokens_from_chars(std::string(210, 'a')), 25, 200).size() == 1);
}

TEST_CASE("trie insert") {
  CandidateTrie trie;
  const auto abc = tokens_from_chars("abc");
  const auto id = trie.insert(abc, 2, 10);
  CHECK(trie.insert(tokens_from_chars("abcde"), 3, 5) != id);
  CHECK(trie.insert(abc, 1, 4) == id);
  CHECK(trie.trace(id).count == 2);
  CHECK(trie.trace(id).last_seen == 10);
  CHECK(trie.insert(abc, 9, 40) == id);
  CHECK(trie.trace(id).count == 9);
  CHECK(trie.trace(id).last_seen == 40);
  CHECK(trie.find(abc) == id);
  CHECK_FALSE(trie.find(tokens_from_chars("ab")).has_value());
  CHECK(trie.path_of(id) == abc);
  CHECK(trie.max_terminal_depth(CandidateTrie::kRoot) == 5);
  CHECK(trie.trace_count() == 2);
  CHECK(trie.node_count() == 6);
  CHECK_THROWS_AS(trie.insert(TokenString{}, 1, 0), std::invalid_argument);
}

TEST_CASE("pieces outside the length bounds never reach the trie") {
  TraceReplayer r(config(3, 4));
  r.ingest_candidates(repeats_of({"ab", "abcdefghij"}), 0);
  for (TraceId id = 0; id < r.trie().trace_count(); ++id) {
    CHECK(r.trie().trace(id).length >= 3);
    CHECK(r.trie().trace(id).length <= 4);
  }
  CHECK(r.trie().trace_count() == 2);  // abcd, efgh; "ij" is too short.
}

TEST_CASE("a completion fires on the final token") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"abc"}), 0);
  const auto f = feed(r, "ababc", false);
  CHECK(f.sizes == std::vector<std::size_t>{0, 0, 2, 2, 7});
  CHECK(render(f.events) == "ab[abc]");
}

TEST_CASE("a token that starts no candidate leaves the pointers alone") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"abc"}), 0);
  feed(r, "ab", false);
  CHECK(r.active_pointers() == 1);
  feed(r, "x", false);
  CHECK(r.active_pointers() == 0);
  feed(r, "a", false);
  CHECK(r.active_pointers() == 1);
}

TEST_CASE("self-overlapping candidate resolves to disjoint replays") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"aa"}), 0);
  CHECK(render(feed(r, "aaa").events) == "[aa]a");
  TraceReplayer r2(config(1));
  r2.ingest_candidates(repeats_of({"aa"}), 0);
  CHECK(render(feed(r2, "aaaa").events) == "[aa][aa]");
}

TEST_CASE("a whole pending queue becomes one trace") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"abcd"}), 0);
  const auto f = feed(r, "abcd", false);
  REQUIRE(f.events.size() == 6);
  CHECK(std::holds_alternative<TraceBegin>(f.events.front()));
  CHECK(std::get<TraceBegin>(f.events.front()).first_occurrence);
  CHECK(std::holds_alternative<TraceEnd>(f.events.back()));
}

TEST_CASE("the longer of two equally fresh matches wins") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"cdef", "abcdef"}), 0);
  const auto events = feed(r, "abcdef").events;
  CHECK(render(events) == "[abcdef]");
  CHECK(std::get<TraceBegin>(events.front()).id == *r.trie().find(tokens_from_chars("abcdef")));
}

TEST_CASE("a shorter match waits for a longer one in flight, then goes eagerly") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"abc", "abcdef"}), 0);
  CHECK(render(feed(r, "abcdef").events) == "[abcdef]");

  TraceReplayer r2(config(1));
  r2.ingest_candidates(repeats_of({"abc", "abcdef"}), 0);
  const auto f = feed(r2, "abcdx", false);
  CHECK(f.sizes == std::vector<std::size_t>{0, 0, 0, 0, 7});
  CHECK(render(f.events) == "[abc]dx");
}

TEST_CASE("a longer overlapping match starting earlier is not lost") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"cd", "abcdef"}), 0);
  CHECK(render(feed(r, "abcdef").events) == "[abcdef]");
}

TEST_CASE("untraceable tasks break matches and pass through") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"abc"}), 0);
  CHECK(render(feed(r, "ab!cabc").events) == "ab!c[abc]");
}

TEST_CASE("flush") {
  TraceReplayer r(config(1));
  CHECK(r.flush().empty());
  r.ingest_candidates(repeats_of({"abcd"}), 0);
  CHECK(render(feed(r, "xab").events) == "xab");
  CHECK(r.pending_size() == 0);
  CHECK(r.active_pointers() == 0);
  CHECK(render(feed(r, "cd").events) == "cd");
  CHECK(render(feed(r, "abcd").events) == "[abcd]");
}

TEST_CASE("replay flags and counts") {
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"ab"}), 0);
  const auto events = feed(r, "abab").events;
  REQUIRE(events.size() == 8);
  CHECK(std::get<TraceBegin>(events[0]).first_occurrence);
  CHECK_FALSE(std::get<TraceBegin>(events[4]).first_occurrence);
  const auto& info = r.trie().trace(0);
  CHECK(info.count == 4);
  CHECK(info.replayed);
  CHECK(info.last_seen == 4);
}

TEST_CASE("once replayed, a trace beats an equal unreplayed rival") {
  // "abcd" and "cdab" tile the same periodic stream; after "abcd" is
  // replayed it keeps being chosen.
  TraceReplayer r(config(1));
  r.ingest_candidates(repeats_of({"abcd", "cdab"}), 0);
  const auto events = feed(r, "abcdabcdabcdabcdab").events;
  const auto abcd = *r.trie().find(tokens_from_chars("abcd"));
  std::size_t begins = 0;
  for (const auto& e : events) {
    if (const auto* b = std::get_if<TraceBegin>(&e)) {
      CHECK(b->id == abcd);
      ++begins;
    }
  }
  CHECK(begins == 4);
}

TEST_CASE("random streams: preservation, well-formedness, latency bound") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 200; ++round) {
    const std::size_t max_len = rng() % 2 ? 0 : 3 + rng() % 6;
    TraceReplayer r(config(2, max_len));
    const std::string alphabet = round % 3 == 0 ? "ab!" : "abc";
    auto word = [&](std::size_t n) {
      std::string w;
      for (std::size_t i = 0; i < n; ++i) w += alphabet[rng() % alphabet.size()];
      return w;
    };
    std::string text;
    std::vector<std::size_t> emitted_after;  // processed count when each task left
    AnnotatedStream events;
    for (int step = 0; step < 300; ++step) {
      if (step % 50 == 0) {
        RepeatResult res;
        for (int k = 0; k < 3; ++k) {
          Repeat rep;
          rep.tokens.clear();
          for (char c : word(2 + rng() % 10)) rep.tokens.push_back(token_for(c));
          rep.starts = {0, 100};
          res.repeats.push_back(rep);
        }
        r.ingest_candidates(res, static_cast<std::uint64_t>(step));
      }
      const char c = alphabet[rng() % alphabet.size()];
      text += c;
      for (auto& e : r.push(task_for(c), token_for(c))) {
        if (std::holds_alternative<TaskDescriptor>(e)) emitted_after.push_back(text.size());
        events.push_back(std::move(e));
      }
    }
    for (auto& e : r.flush()) events.push_back(std::move(e));

    std::vector<TaskDescriptor> input;
    for (char c : text) input.push_back(task_for(c));
    REQUIRE(erase_markers(events) == input);
    REQUIRE_NOTHROW(check_well_formed(events));

    const auto m = matching_from_events(events);
    REQUIRE_FALSE(validate_matching(m, tokenize_stream(input), 2).has_value());
    for (const auto& t : m.traces) {
      for (const auto& iv : t.intervals) {
        TokenString path;
        for (std::size_t i = iv.begin; i < iv.end; ++i) path.push_back(token_for(text[i]));
        REQUIRE(r.trie().find(path).has_value());
      }
    }

    const std::size_t depth = r.trie().max_terminal_depth(CandidateTrie::kRoot);
    for (std::size_t i = 0; i < emitted_after.size(); ++i) {
      REQUIRE(emitted_after[i] - (i + 1) <= depth);
    }
  }
}
