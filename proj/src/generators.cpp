#include "autotrace/generators.hpp"

#include <stdexcept>
#include <string>

namespace autotrace {

namespace {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

RegionArg arg(std::string region, Privilege p, std::string field = "v") {
  return RegionArg{std::move(region), {std::move(field)}, p, std::nullopt};
}

TaskDescriptor loop_task(std::string_view prefix, std::size_t i) {
  const std::string id = std::to_string(i);
  return TaskDescriptor{std::string(prefix) + id,
                        {arg("in" + id, Privilege::read), arg("out" + id, Privilege::write)},
                        false};
}

void jacobi(const GeneratorSpec& spec, std::vector<TaskDescriptor>& out) {
  // x = (b - dot(R, x)) / d with the solution buffers x1 and x2 swapping
  // roles every iteration.
  for (std::size_t i = 0; i < spec.iterations; ++i) {
    const std::string in = i % 2 == 0 ? "x1" : "x2";
    const std::string next = i % 2 == 0 ? "x2" : "x1";
    out.push_back({"DOT",
                   {arg("R", Privilege::read), arg(in, Privilege::read), arg("t1", Privilege::write)},
                   false});
    out.push_back({"SUB",
                   {arg("b", Privilege::read), arg("t1", Privilege::read), arg("t2", Privilege::write)},
                   false});
    out.push_back({"DIV",
                   {arg("t2", Privilege::read), arg("d", Privilege::read), arg(next, Privilege::write)},
                   false});
  }
}

TaskDescriptor convergence_check() {
  return TaskDescriptor{"CHECK_CONVERGENCE",
                        {arg("x1", Privilege::read), arg("residual", Privilege::reduce)},
                        false};
}

}  // namespace

std::optional<GeneratorKind> parse_generator_kind(std::string_view text) {
  if (text == "jacobi") return GeneratorKind::jacobi;
  if (text == "periodic") return GeneratorKind::periodic;
  if (text == "periodic_with_noise") return GeneratorKind::periodic_with_noise;
  if (text == "nested_loops") return GeneratorKind::nested_loops;
  if (text == "random") return GeneratorKind::random;
  return std::nullopt;
}

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::jacobi:
      return "jacobi";
    case GeneratorKind::periodic:
      return "periodic";
    case GeneratorKind::periodic_with_noise:
      return "periodic_with_noise";
    case GeneratorKind::nested_loops:
      return "nested_loops";
    case GeneratorKind::random:
      return "random";
  }
  return "jacobi";
}

void GeneratorSpec::validate() const {
  switch (kind) {
    case GeneratorKind::periodic:
    case GeneratorKind::periodic_with_noise:
      if (period == 0) throw std::invalid_argument("period must be >= 1");
      if (!(noise_rate >= 0 && noise_rate <= 1)) {
        throw std::invalid_argument("noise rate must be in [0, 1]");
      }
      break;
    case GeneratorKind::nested_loops:
      if (period == 0 || inner_repeats == 0) {
        throw std::invalid_argument("nested loops need a non-empty inner body");
      }
      break;
    case GeneratorKind::random:
      if (alphabet == 0) throw std::invalid_argument("alphabet must be >= 1");
      break;
    case GeneratorKind::jacobi:
      break;
  }
}

std::vector<TaskDescriptor> generate(const GeneratorSpec& spec) {
  spec.validate();
  std::vector<TaskDescriptor> out;
  SplitMix64 rng(spec.seed);
  switch (spec.kind) {
    case GeneratorKind::jacobi:
      jacobi(spec, out);
      break;
    case GeneratorKind::periodic:
      for (std::size_t it = 0; it < spec.iterations; ++it) {
        for (std::size_t i = 0; i < spec.period; ++i) out.push_back(loop_task("T", i));
      }
      break;
    case GeneratorKind::periodic_with_noise:
      for (std::size_t it = 0; it < spec.iterations; ++it) {
        for (std::size_t i = 0; i < spec.period; ++i) {
          out.push_back(loop_task("T", i));
          if (rng.unit() < spec.noise_rate) out.push_back(convergence_check());
        }
      }
      break;
    case GeneratorKind::nested_loops:
      for (std::size_t it = 0; it < spec.iterations; ++it) {
        out.push_back(loop_task("OUTER_BEGIN", 0));
        for (std::size_t r = 0; r < spec.inner_repeats; ++r) {
          for (std::size_t i = 0; i < spec.period; ++i) out.push_back(loop_task("INNER", i));
        }
        out.push_back(loop_task("OUTER_END", 0));
      }
      break;
    case GeneratorKind::random:
      out.reserve(spec.length);
      for (std::size_t i = 0; i < spec.length; ++i) {
        out.push_back(loop_task("R", rng.below(spec.alphabet)));
      }
      break;
  }
  return out;
}

}  // namespace autotrace
