#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "autotrace/events.hpp"
#include "autotrace/token.hpp"

namespace autotrace {

// Strict line parser failure; line numbers start at 1.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Task-stream format, one event per line:
//   task <name> (<region_id>:<privilege>:<field,...>[:<partition_id>])*
//   untraceable <name> (<arg>)*
// Blank lines and lines starting with '#' are skipped.
std::vector<TaskDescriptor> parse_task_stream(std::istream& in);
std::vector<TaskDescriptor> parse_task_stream(std::string_view text);
std::vector<TaskDescriptor> read_task_file(const std::string& path);

std::string format_task(const TaskDescriptor& task);
void write_task_stream(std::ostream& out, const std::vector<TaskDescriptor>& tasks);

// Annotated format adds `tbegin <id> <record|replay>` and `tend <id>` lines.
AnnotatedStream parse_annotated_stream(std::istream& in);
AnnotatedStream parse_annotated_stream(std::string_view text);

std::string format_event(const AnnotatedEvent& event);
void write_annotated_stream(std::ostream& out, const AnnotatedStream& events);
std::string to_text(const AnnotatedStream& events);

}  // namespace autotrace
