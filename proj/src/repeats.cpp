#include "autotrace/repeats.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <utility>

namespace autotrace {

namespace {

// Dense ranks 0..m-1 preserving token order.
std::vector<std::int32_t> compress(std::span<const Token> s, std::int32_t& upper) {
  std::unordered_map<std::uint64_t, std::int32_t> rank_of;
  for (Token t : s) rank_of.try_emplace(t.value, 0);
  std::vector<std::uint64_t> distinct;
  distinct.reserve(rank_of.size());
  for (const auto& [value, rank] : rank_of) distinct.push_back(value);
  std::sort(distinct.begin(), distinct.end());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    rank_of[distinct[i]] = static_cast<std::int32_t>(i);
  }
  std::vector<std::int32_t> rank(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) rank[i] = rank_of.find(s[i].value)->second;
  upper = distinct.empty() ? 0 : static_cast<std::int32_t>(distinct.size() - 1);
  return rank;
}

// Induced sorting (SA-IS) over symbols in [0, upper]; linear time.
std::vector<std::int32_t> sa_is(const std::vector<std::int32_t>& s, std::int32_t upper) {
  const auto n = static_cast<std::int32_t>(s.size());
  if (n == 0) return {};
  if (n == 1) return {0};
  if (n == 2) return s[0] < s[1] ? std::vector<std::int32_t>{0, 1} : std::vector<std::int32_t>{1, 0};

  std::vector<std::int32_t> sa(n);
  // t[i] = s[i] * 2 + 1 when suffix i is S-type (smaller than suffix i + 1),
  // s[i] * 2 when L-type; one load answers both questions.
  std::vector<std::int32_t> t(n);
  t[n - 1] = s[n - 1] * 2;
  for (std::int32_t i = n - 2; i >= 0; --i) {
    const bool stype = s[i] == s[i + 1] ? (t[i + 1] & 1) != 0 : s[i] < s[i + 1];
    t[i] = s[i] * 2 + (stype ? 1 : 0);
  }
  const auto is_lms = [&](std::int32_t i) { return i > 0 && (t[i] & 1) && !(t[i - 1] & 1); };
  // Bucket starts for S-type (sum_s) and L-type (sum_l) suffixes.
  std::vector<std::int32_t> sum_l(upper + 2), sum_s(upper + 2);
  for (std::int32_t i = 0; i < n; ++i) {
    if (!(t[i] & 1)) {
      ++sum_s[s[i]];
    } else {
      ++sum_l[s[i] + 1];
    }
  }
  for (std::int32_t i = 0; i <= upper; ++i) {
    sum_s[i] += sum_l[i];
    if (i < upper) sum_l[i + 1] += sum_s[i];
  }

  std::vector<std::int32_t> buf(upper + 2);
  auto induce = [&](const std::vector<std::int32_t>& lms) {
    std::fill(sa.begin(), sa.end(), -1);
    std::copy(sum_s.begin(), sum_s.end(), buf.begin());
    for (auto d : lms) sa[buf[s[d]]++] = d;
    std::copy(sum_l.begin(), sum_l.end(), buf.begin());
    sa[buf[s[n - 1]]++] = n - 1;
    for (std::int32_t i = 0; i < n; ++i) {
      const auto v = sa[i];
      if (v < 1) continue;
      const auto c = t[v - 1];
      if (!(c & 1)) sa[buf[c >> 1]++] = v - 1;
    }
    std::copy(sum_l.begin(), sum_l.end(), buf.begin());
    for (std::int32_t i = n - 1; i >= 0; --i) {
      const auto v = sa[i];
      if (v < 1) continue;
      const auto c = t[v - 1];
      if (c & 1) sa[--buf[(c >> 1) + 1]] = v - 1;
    }
  };

  std::vector<std::int32_t> lms;
  for (std::int32_t i = 1; i < n; ++i) {
    if (is_lms(i)) lms.push_back(i);
  }
  const auto m = static_cast<std::int32_t>(lms.size());
  induce(lms);
  if (m == 0) return sa;

  // Name the LMS substrings and sort them recursively.
  std::vector<std::int32_t> lms_map(n, -1);
  for (std::int32_t k = 0; k < m; ++k) lms_map[lms[k]] = k;
  std::vector<std::int32_t> sorted_lms;
  sorted_lms.reserve(m);
  for (auto v : sa) {
    if (is_lms(v)) sorted_lms.push_back(v);
  }
  std::vector<std::int32_t> rec_s(m);
  std::int32_t rec_upper = 0;
  rec_s[lms_map[sorted_lms[0]]] = 0;
  for (std::int32_t i = 1; i < m; ++i) {
    auto l = sorted_lms[i - 1];
    auto r = sorted_lms[i];
    const auto end_l = lms_map[l] + 1 < m ? lms[lms_map[l] + 1] : n;
    const auto end_r = lms_map[r] + 1 < m ? lms[lms_map[r] + 1] : n;
    bool same = true;
    if (end_l - l != end_r - r) {
      same = false;
    } else {
      while (l < end_l && s[l] == s[r]) {
        ++l;
        ++r;
      }
      if (l == n || s[l] != s[r]) same = false;
    }
    if (!same) ++rec_upper;
    rec_s[lms_map[sorted_lms[i]]] = rec_upper;
  }
  const auto rec_sa = sa_is(rec_s, rec_upper);
  for (std::int32_t i = 0; i < m; ++i) sorted_lms[i] = lms[rec_sa[i]];
  induce(sorted_lms);
  return sa;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), min_(n) {
    std::iota(parent_.begin(), parent_.end(), 0u);
    std::iota(min_.begin(), min_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (min_[a] > min_[b]) std::swap(a, b);
    parent_[b] = a;
  }

  // Leftmost suffix-array rank in the set.
  std::uint32_t leftmost(std::uint32_t x) { return min_[find(x)]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> min_;
};

}  // namespace

SuffixStructures build_suffix_structures(std::span<const Token> s) {
  SuffixStructures out;
  const std::size_t n = s.size();
  if (n == 0) return out;
  if (n > std::numeric_limits<std::int32_t>::max() / 2) {
    throw std::length_error("token string too long for 32-bit suffix array");
  }

  std::int32_t upper = 0;
  const auto ranks = compress(s, upper);
  const auto built = sa_is(ranks, upper);
  std::vector<std::uint32_t> sa(built.begin(), built.end());

  // Permuted LCP (Kaerkkaeinen et al.): plcp[i] >= plcp[i - 1] - 1 lets the
  // scan run in text order.
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> plcp(n);
  plcp[sa[0]] = kNone;
  for (std::size_t i = 1; i < n; ++i) plcp[sa[i]] = sa[i - 1];
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t j = plcp[i];
    if (j == kNone) {
      plcp[i] = 0;
      h = 0;
      continue;
    }
    while (i + h < n && j + h < n && ranks[i + h] == ranks[j + h]) ++h;
    plcp[i] = static_cast<std::uint32_t>(h);
    if (h > 0) --h;
  }
  std::vector<std::uint32_t> lcp(n - 1);
  for (std::size_t i = 1; i < n; ++i) lcp[i - 1] = plcp[sa[i]];

  out.sa = std::move(sa);
  out.lcp = std::move(lcp);
  return out;
}

namespace {

struct LongestRepeat {
  DisjointRepeat repeat;
  std::uint32_t rank;  // first suffix-array rank of the block sharing the prefix
};

// Whether some block of suffixes sharing a prefix of length len has two
// members at least len apart.
std::optional<LongestRepeat> disjoint_at(const SuffixStructures& suffixes, std::uint32_t len) {
  const auto& sa = suffixes.sa;
  const auto& lcp = suffixes.lcp;
  std::uint32_t block = 0;
  std::uint32_t lo = sa[0];
  std::uint32_t hi = sa[0];
  for (std::uint32_t i = 1; i <= sa.size(); ++i) {
    if (i == sa.size() || lcp[i - 1] < len) {
      if (hi - lo >= len) return LongestRepeat{{len, lo, hi}, block};
      if (i == sa.size()) break;
      block = i;
      lo = hi = sa[i];
    } else {
      lo = std::min(lo, sa[i]);
      hi = std::max(hi, sa[i]);
    }
  }
  return std::nullopt;
}

// A disjoint repeat of length L implies one of every shorter length, so the
// longest is found by bisection.
std::optional<LongestRepeat> longest_repeat(const SuffixStructures& suffixes) {
  std::optional<LongestRepeat> best;
  std::uint32_t lo = 1;
  auto hi = static_cast<std::uint32_t>(suffixes.sa.size() / 2);
  while (lo <= hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (auto found = disjoint_at(suffixes, mid)) {
      best = found;
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return best;
}

std::vector<RepeatCandidate> candidates(std::span<const Token> s, const SuffixStructures& suffixes,
                                        std::size_t min_len,
                                        const std::optional<LongestRepeat>& seed);

}  // namespace

std::optional<DisjointRepeat> longest_disjoint_repeat(const SuffixStructures& suffixes) {
  if (suffixes.sa.size() < 2) return std::nullopt;
  if (auto found = longest_repeat(suffixes)) return found->repeat;
  return std::nullopt;
}

std::vector<RepeatCandidate> repeat_candidates(std::span<const Token> s,
                                               const SuffixStructures& suffixes,
                                               std::size_t min_len) {
  return candidates(s, suffixes, min_len, std::nullopt);
}

namespace {

std::vector<RepeatCandidate> candidates(std::span<const Token> s, const SuffixStructures& suffixes,
                                        std::size_t min_len,
                                        const std::optional<LongestRepeat>& seed) {
  if (min_len == 0) throw std::invalid_argument("minimum repeat length must be at least 1");
  const auto& sa = suffixes.sa;
  const auto& lcp = suffixes.lcp;
  const std::size_t n = s.size();
  if (sa.size() != n) throw std::invalid_argument("suffix structures do not match the string");

  // (length, adjacency, start); the adjacency index locates the sub-string
  // in the suffix array.
  struct Raw {
    std::uint32_t length;
    std::uint32_t adjacency;
    std::uint32_t start;
  };
  std::vector<Raw> raw;
  raw.reserve(2 * lcp.size());
  for (std::uint32_t i = 0; i < lcp.size(); ++i) {
    const std::uint32_t p = lcp[i];
    const std::uint32_t lo = std::min(sa[i], sa[i + 1]);
    const std::uint32_t hi = std::max(sa[i], sa[i + 1]);
    if (lo + p <= hi) {
      if (p < min_len || p == 0) continue;
      raw.push_back({p, i, sa[i]});
      raw.push_back({p, i, sa[i + 1]});
    } else {
      // The overlap is a run of copies of s[lo, hi): keep the two abutting
      // halves, trimmed to whole periods.
      const std::uint32_t d = hi - lo;
      std::uint32_t l = (p + d) / 2;
      l -= l % d;
      if (l < min_len || l == 0) continue;
      raw.push_back({l, i, lo});
      raw.push_back({l, i, lo + l});
    }
  }
  if (seed && seed->repeat.length >= min_len) {
    raw.push_back({seed->repeat.length, seed->rank, seed->repeat.first});
    raw.push_back({seed->repeat.length, seed->rank, seed->repeat.second});
  }
  if (raw.empty()) return {};

  // Walk lengths downward, merging suffix-array neighbours whose common
  // prefix reaches the current length. Candidates of length L in the same
  // merged block spell the same sub-string, and the block's leftmost rank
  // orders those sub-strings lexicographically.
  std::vector<std::uint32_t> by_lcp(lcp.size());
  std::iota(by_lcp.begin(), by_lcp.end(), 0u);
  std::sort(by_lcp.begin(), by_lcp.end(),
            [&](std::uint32_t a, std::uint32_t b) { return lcp[a] > lcp[b]; });
  std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.length > b.length; });

  DisjointSets blocks(n);
  std::vector<std::uint32_t> group(raw.size());
  std::size_t e = 0;
  for (std::size_t c = 0; c < raw.size(); ++c) {
    const std::uint32_t len = raw[c].length;
    while (e < by_lcp.size() && lcp[by_lcp[e]] >= len) {
      blocks.unite(by_lcp[e], by_lcp[e] + 1);
      ++e;
    }
    group[c] = blocks.leftmost(raw[c].adjacency);
  }

  std::vector<std::uint32_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::tuple(raw[b].length, group[a], raw[a].start) <
           std::tuple(raw[a].length, group[b], raw[b].start);
  });

  std::vector<RepeatCandidate> out;
  out.reserve(raw.size());
  std::uint32_t id = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto c = order[k];
    if (k > 0) {
      const auto prev = order[k - 1];
      if (raw[prev].length != raw[c].length || group[prev] != group[c]) ++id;
    }
    out.push_back({raw[c].length, id, raw[c].start});
  }
  return out;
}

}  // namespace

RepeatResult find_repeats(std::span<const Token> s, std::size_t min_len) {
  if (min_len == 0) throw std::invalid_argument("minimum repeat length must be at least 1");
  RepeatResult result;
  if (s.size() < 2 * min_len) return result;

  const auto suffixes = build_suffix_structures(s);
  // Adjacent suffixes alone can miss the longest disjoint repeat (in
  // "bababab", "bab" at 0 and 4), so its two occurrences are added.
  const auto seed = longest_repeat(suffixes);
  const auto all = candidates(s, suffixes, min_len, seed);

  // Candidates arrive longest first, so any selected interval that meets a
  // new one covers its first or last position.
  std::vector<std::uint8_t> marked(s.size(), 0);
  std::uint32_t current_id = 0;
  bool have_current = false;
  for (const auto& c : all) {
    const std::size_t first = c.start;
    const std::size_t last = c.start + c.length - 1;
    if (marked[first] || marked[last]) continue;
    std::fill(marked.begin() + first, marked.begin() + last + 1, std::uint8_t{1});
    if (!have_current || c.substring_id != current_id) {
      Repeat r;
      r.tokens.assign(s.begin() + first, s.begin() + last + 1);
      result.repeats.push_back(std::move(r));
      current_id = c.substring_id;
      have_current = true;
    }
    result.repeats.back().starts.push_back(first);
  }
  return result;
}

std::size_t coverage_of(const RepeatResult& result) {
  std::size_t total = 0;
  for (const auto& r : result.repeats) total += r.length() * r.starts.size();
  return total;
}

}  // namespace autotrace
