#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace autotrace {

enum class Privilege : std::uint8_t { read, write, read_write, reduce };

std::string_view to_string(Privilege p);
std::optional<Privilege> parse_privilege(std::string_view text);

struct RegionArg {
  std::string region_id;
  std::vector<std::string> fields;
  Privilege privilege = Privilege::read;
  std::optional<std::string> partition_id;

  bool operator==(const RegionArg&) const = default;
};

struct TaskDescriptor {
  std::string task_name;
  std::vector<RegionArg> args;
  // Operations that cannot be captured in a trace.
  bool untraceable = false;

  bool operator==(const TaskDescriptor&) const = default;
};

// Throws std::invalid_argument when a region argument has an empty or
// duplicated field list, or when any identifier is empty.
void validate(const TaskDescriptor& task);

/// Alphabet symbol of every string analysis: a 64-bit hash of one task.
///
/// Ordinary tokens have the top bit clear. Tokens of untraceable tasks live
/// in the reserved namespace with the top bit set, so the analyses can tell
/// them apart without looking at the descriptor.
struct Token {
  std::uint64_t value = 0;

  static constexpr std::uint64_t kUntraceableBit = std::uint64_t{1} << 63;

  constexpr bool untraceable() const { return (value & kUntraceableBit) != 0; }

  auto operator<=>(const Token&) const = default;
};

using TokenString = std::vector<Token>;

// Seed-free and platform independent: the hash is taken over a canonical,
// length-prefixed byte encoding of the descriptor.
Token hash_task(const TaskDescriptor& task);

TokenString tokenize_stream(std::span<const TaskDescriptor> tasks);

// Maps each character to one token, for debugging and tests that use the
// "aabcbcbaa" style notation. Token order follows character order.
TokenString tokens_from_chars(std::string_view text);

}  // namespace autotrace

template <>
struct std::hash<autotrace::Token> {
  std::size_t operator()(const autotrace::Token& t) const noexcept {
    return static_cast<std::size_t>(t.value);
  }
};
