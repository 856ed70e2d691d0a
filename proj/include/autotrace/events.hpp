#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "autotrace/token.hpp"

namespace autotrace {

using TraceId = std::uint32_t;

struct TraceBegin {
  TraceId id = 0;
  // True on the first emission of this id: the runtime records instead of
  // replaying.
  bool first_occurrence = false;

  bool operator==(const TraceBegin&) const = default;
};

struct TraceEnd {
  TraceId id = 0;

  bool operator==(const TraceEnd&) const = default;
};

using AnnotatedEvent = std::variant<TaskDescriptor, TraceBegin, TraceEnd>;
using AnnotatedStream = std::vector<AnnotatedEvent>;

}  // namespace autotrace
