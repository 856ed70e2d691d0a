#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "autotrace/token.hpp"

namespace autotrace {

struct SuffixStructures {
  // Suffix start positions in lexicographic order of the suffixes.
  std::vector<std::uint32_t> sa;
  // lcp[i] = longest common prefix of suffixes sa[i] and sa[i + 1].
  std::vector<std::uint32_t> lcp;
};

// Prefix doubling with radix passes, O(n log n); LCP by rank scan, O(n).
// Tokens compare by their 64-bit value.
SuffixStructures build_suffix_structures(std::span<const Token> s);

// A proposed occurrence of a repeated sub-string. Candidates with equal
// substring_id spell the same tokens; ids are dense and increase with the
// lexicographic order of the sub-strings of one length.
struct RepeatCandidate {
  std::uint32_t length = 0;
  std::uint32_t substring_id = 0;
  std::uint32_t start = 0;

  bool operator==(const RepeatCandidate&) const = default;
};

struct Repeat {
  TokenString tokens;
  // Selected occurrences, pairwise disjoint, increasing.
  std::vector<std::size_t> starts;

  std::size_t length() const { return tokens.size(); }
};

struct RepeatResult {
  // In selection order: non-increasing length.
  std::vector<Repeat> repeats;

  bool empty() const { return repeats.empty(); }
};

// Candidate generation plus the sort; exposed for the debug dump and tests.
// Two candidates per suffix-array adjacency, minus those shorter than min_len.
std::vector<RepeatCandidate> repeat_candidates(std::span<const Token> s,
                                               const SuffixStructures& suffixes,
                                               std::size_t min_len);

struct DisjointRepeat {
  std::uint32_t length = 0;
  std::uint32_t first = 0;
  std::uint32_t second = 0;  // second >= first + length

  bool operator==(const DisjointRepeat&) const = default;
};

// Longest sub-string with two non-overlapping occurrences; O(n log n).
std::optional<DisjointRepeat> longest_disjoint_repeat(const SuffixStructures& suffixes);

// Non-overlapping repeated sub-strings: greedy selection over sorted
// candidates, longest first. Always contains a longest sub-string that has
// two disjoint occurrences in s (if it is at least min_len long).
RepeatResult find_repeats(std::span<const Token> s, std::size_t min_len);

std::size_t coverage_of(const RepeatResult& result);

}  // namespace autotrace
