#include "autotrace/stream_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace autotrace {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

RegionArg parse_region_arg(std::size_t line_no, std::string_view text) {
  auto parts = split(text, ':');
  if (parts.size() != 3 && parts.size() != 4) {
    throw ParseError(line_no, "malformed region argument '" + std::string(text) +
                                  "', expected <region>:<privilege>:<fields>[:<partition>]");
  }
  RegionArg arg;
  arg.region_id = std::string(parts[0]);
  auto priv = parse_privilege(parts[1]);
  if (!priv) throw ParseError(line_no, "unknown privilege '" + std::string(parts[1]) + "'");
  arg.privilege = *priv;
  for (auto f : split(parts[2], ',')) arg.fields.emplace_back(f);
  if (parts.size() == 4) arg.partition_id = std::string(parts[3]);
  return arg;
}

// Returns false for blank and comment lines.
bool parse_task_words(std::size_t line_no, const std::vector<std::string_view>& w,
                      TaskDescriptor& out) {
  if (w.size() < 2) throw ParseError(line_no, "expected '<kind> <name> ...'");
  if (w[0] == "task") {
    out.untraceable = false;
  } else if (w[0] == "untraceable") {
    out.untraceable = true;
  } else {
    return false;
  }
  out.task_name = std::string(w[1]);
  out.args.clear();
  for (std::size_t i = 2; i < w.size(); ++i) out.args.push_back(parse_region_arg(line_no, w[i]));
  try {
    validate(out);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
  return true;
}

bool skippable(const std::vector<std::string_view>& w) {
  return w.empty() || w[0].front() == '#';
}

TraceId parse_id(std::size_t line_no, std::string_view text) {
  TraceId id = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line_no, "invalid trace id '" + std::string(text) + "'");
  }
  return id;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::vector<TaskDescriptor> parse_task_stream(std::istream& in) {
  std::vector<TaskDescriptor> tasks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto w = words(line);
    if (skippable(w)) continue;
    TaskDescriptor t;
    if (!parse_task_words(line_no, w, t)) {
      throw ParseError(line_no, "unknown line kind '" + std::string(w[0]) + "'");
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::vector<TaskDescriptor> parse_task_stream(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_task_stream(in);
}

std::vector<TaskDescriptor> read_task_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_task_stream(in);
}

std::string format_task(const TaskDescriptor& task) {
  std::string out = task.untraceable ? "untraceable " : "task ";
  out += task.task_name;
  for (const auto& arg : task.args) {
    out += ' ';
    out += arg.region_id;
    out += ':';
    out += to_string(arg.privilege);
    out += ':';
    for (std::size_t i = 0; i < arg.fields.size(); ++i) {
      if (i) out += ',';
      out += arg.fields[i];
    }
    if (arg.partition_id) {
      out += ':';
      out += *arg.partition_id;
    }
  }
  return out;
}

void write_task_stream(std::ostream& out, const std::vector<TaskDescriptor>& tasks) {
  for (const auto& t : tasks) out << format_task(t) << '\n';
}

AnnotatedStream parse_annotated_stream(std::istream& in) {
  AnnotatedStream events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto w = words(line);
    if (skippable(w)) continue;
    if (w[0] == "tbegin") {
      if (w.size() != 3) throw ParseError(line_no, "expected 'tbegin <id> <record|replay>'");
      TraceBegin b{parse_id(line_no, w[1]), false};
      if (w[2] == "record") {
        b.first_occurrence = true;
      } else if (w[2] != "replay") {
        throw ParseError(line_no, "expected record or replay, got '" + std::string(w[2]) + "'");
      }
      events.emplace_back(b);
    } else if (w[0] == "tend") {
      if (w.size() != 2) throw ParseError(line_no, "expected 'tend <id>'");
      events.emplace_back(TraceEnd{parse_id(line_no, w[1])});
    } else {
      TaskDescriptor t;
      if (!parse_task_words(line_no, w, t)) {
        throw ParseError(line_no, "unknown line kind '" + std::string(w[0]) + "'");
      }
      events.emplace_back(std::move(t));
    }
  }
  return events;
}

AnnotatedStream parse_annotated_stream(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_annotated_stream(in);
}

std::string format_event(const AnnotatedEvent& event) {
  if (const auto* t = std::get_if<TaskDescriptor>(&event)) return format_task(*t);
  if (const auto* b = std::get_if<TraceBegin>(&event)) {
    return "tbegin " + std::to_string(b->id) + (b->first_occurrence ? " record" : " replay");
  }
  return "tend " + std::to_string(std::get<TraceEnd>(event).id);
}

void write_annotated_stream(std::ostream& out, const AnnotatedStream& events) {
  for (const auto& e : events) out << format_event(e) << '\n';
}

std::string to_text(const AnnotatedStream& events) {
  std::ostringstream out;
  write_annotated_stream(out, events);
  return out.str();
}

}  // namespace autotrace
