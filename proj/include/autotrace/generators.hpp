#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "autotrace/token.hpp"

namespace autotrace {

enum class GeneratorKind { jacobi, periodic, periodic_with_noise, nested_loops, random };

std::optional<GeneratorKind> parse_generator_kind(std::string_view text);
std::string_view to_string(GeneratorKind kind);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::jacobi;
  std::size_t iterations = 100;
  // periodic kinds: tasks per iteration; nested_loops: tasks in the inner body.
  std::size_t period = 6;
  // nested_loops: inner-body repetitions per outer iteration.
  std::size_t inner_repeats = 4;
  // random: distinct task names and stream length.
  std::size_t alphabet = 50;
  std::size_t length = 1000;
  // periodic_with_noise: probability of a convergence check after each task.
  double noise_rate = 0.005;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument.
  void validate() const;
};

// Seeded kinds draw from a splitmix64 sequence, so output is identical on
// every platform.
std::vector<TaskDescriptor> generate(const GeneratorSpec& spec);

}  // namespace autotrace
