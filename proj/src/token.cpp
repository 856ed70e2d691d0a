#include "autotrace/token.hpp"

#include <stdexcept>
#include <unordered_set>

namespace autotrace {

namespace {

// FNV-1a over a canonical byte encoding, finished with a splitmix64 mix so
// that single-bit differences spread over the whole word.
class CanonicalHasher {
 public:
  void byte(std::uint8_t b) {
    state_ ^= b;
    state_ *= 0x100000001b3ULL;
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void str(std::string_view s) {
    u64(s.size());
    for (char c : s) byte(static_cast<std::uint8_t>(c));
  }

  std::uint64_t finish() const {
    std::uint64_t z = state_ + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string_view to_string(Privilege p) {
  switch (p) {
    case Privilege::read:
      return "read";
    case Privilege::write:
      return "write";
    case Privilege::read_write:
      return "read_write";
    case Privilege::reduce:
      return "reduce";
  }
  return "read";
}

std::optional<Privilege> parse_privilege(std::string_view text) {
  if (text == "read") return Privilege::read;
  if (text == "write") return Privilege::write;
  if (text == "read_write") return Privilege::read_write;
  if (text == "reduce") return Privilege::reduce;
  return std::nullopt;
}

void validate(const TaskDescriptor& task) {
  if (task.task_name.empty()) throw std::invalid_argument("task name is empty");
  for (const auto& arg : task.args) {
    if (arg.region_id.empty()) {
      throw std::invalid_argument("task " + task.task_name + ": empty region id");
    }
    if (arg.fields.empty()) {
      throw std::invalid_argument("task " + task.task_name + ": region " + arg.region_id +
                                  " has no fields");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& f : arg.fields) {
      if (f.empty()) {
        throw std::invalid_argument("task " + task.task_name + ": empty field id");
      }
      if (!seen.insert(f).second) {
        throw std::invalid_argument("task " + task.task_name + ": duplicate field " + f +
                                    " in region " + arg.region_id);
      }
    }
    if (arg.partition_id && arg.partition_id->empty()) {
      throw std::invalid_argument("task " + task.task_name + ": empty partition id");
    }
  }
}

Token hash_task(const TaskDescriptor& task) {
  CanonicalHasher h;
  h.str(task.task_name);
  h.u64(task.args.size());
  for (const auto& arg : task.args) {
    h.str(arg.region_id);
    h.byte(static_cast<std::uint8_t>(arg.privilege));
    h.u64(arg.fields.size());
    for (const auto& f : arg.fields) h.str(f);
    if (arg.partition_id) {
      h.byte(1);
      h.str(*arg.partition_id);
    } else {
      h.byte(0);
    }
  }
  std::uint64_t v = h.finish() & ~Token::kUntraceableBit;
  if (task.untraceable) v |= Token::kUntraceableBit;
  return Token{v};
}

TokenString tokenize_stream(std::span<const TaskDescriptor> tasks) {
  TokenString out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) out.push_back(hash_task(t));
  return out;
}

TokenString tokens_from_chars(std::string_view text) {
  TokenString out;
  out.reserve(text.size());
  for (char c : text) out.push_back(Token{static_cast<unsigned char>(c)});
  return out;
}

}  // namespace autotrace
