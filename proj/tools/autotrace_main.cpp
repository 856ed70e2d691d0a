// Command-line front end: stream generation, engine runs, replication checks
// and a repeat-miner dump.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "autotrace/coverage.hpp"
#include "autotrace/engine.hpp"
#include "autotrace/generators.hpp"
#include "autotrace/replication.hpp"
#include "autotrace/repeats.hpp"
#include "autotrace/stream_io.hpp"

namespace {

using namespace autotrace;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitDivergence = 3;

struct CostFlags {
  std::int64_t alpha_ns = 1'000'000;
  std::int64_t alpha_m_ns = 1'200'000;
  std::int64_t alpha_r_ns = 100'000;
  std::int64_t overhead_ns = 200'000;

  CostParams params() const {
    return CostParams{std::chrono::nanoseconds(alpha_ns), std::chrono::nanoseconds(alpha_m_ns),
                      std::chrono::nanoseconds(alpha_r_ns), std::chrono::nanoseconds(overhead_ns)};
  }
};

void add_engine_flags(CLI::App* app, EngineConfig& config) {
  app->add_option("--min-trace-length", config.min_trace_length, "Shortest trace to consider")
      ->capture_default_str();
  app->add_option("--max-trace-length", config.max_trace_length,
                  "Longest trace to replay; longer repeats are split (0 = unbounded)")
      ->capture_default_str();
  app->add_option("--batchsize", config.batch_size, "Task history buffer size")
      ->capture_default_str();
  app->add_option("--multi-scale-factor", config.multi_scale_factor,
                  "Granule of the ruler-function sampling")
      ->capture_default_str();
  app->add_option("--workers", config.worker_count, "Background mining threads (0 = inline)")
      ->capture_default_str();
  app->add_option("--wait-count", config.initial_wait_count,
                  "Initial tokens to process before ingesting a job's result")
      ->capture_default_str();
  app->add_option("--count-cap", config.scoring.count_cap)->capture_default_str();
  app->add_option("--decay", config.scoring.decay)->capture_default_str();
  app->add_option("--decay-interval", config.scoring.decay_interval)->capture_default_str();
  app->add_option("--replay-bonus", config.scoring.replay_bonus)->capture_default_str();
}

std::vector<TaskDescriptor> read_input(const std::string& path) {
  if (path == "-") return parse_task_stream(std::cin);
  return read_task_file(path);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

int cmd_generate(const GeneratorSpec& spec, const std::string& output) {
  auto tasks = generate(spec);
  if (output.empty() || output == "-") {
    write_task_stream(std::cout, tasks);
  } else {
    auto out = open_output(output);
    write_task_stream(out, tasks);
  }
  return kExitOk;
}

int cmd_run(const std::string& input, const EngineConfig& config, const CostFlags& cost,
            std::size_t window, const std::string& out_dir) {
  const auto params = cost.params();
  params.validate();
  const auto tasks = read_input(input);

  std::vector<Decision> decisions;
  const auto start = std::chrono::steady_clock::now();
  const auto events = run_stream(tasks, config, &decisions);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const auto report = simulate_cost(events, params);
  const auto fraction = traced_fraction_report(events, window);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  {
    auto out = open_output(dir / "annotated.txt");
    write_annotated_stream(out, events);
  }
  {
    auto out = open_output(dir / "cost.csv");
    write_cost_csv(out, report);
  }
  {
    auto out = open_output(dir / "fraction.csv");
    write_fraction_csv(out, fraction);
  }
  {
    auto out = open_output(dir / "decisions.log");
    write_decision_log(out, decisions);
  }

  const auto baseline = untraced_cost(tasks.size(), params);
  const double per_task_us =
      tasks.empty() ? 0.0
                    : std::chrono::duration<double, std::micro>(elapsed).count() /
                          static_cast<double>(tasks.size());
  std::cout << "tasks " << tasks.size() << "\n"
            << "traced " << report.recorded_tasks + report.replayed_tasks << " (recorded "
            << report.recorded_tasks << ", replayed " << report.replayed_tasks << " in "
            << report.replays << " replays)\n"
            << std::fixed << std::setprecision(6) << "analysis_seconds "
            << std::chrono::duration<double>(report.total).count() << "\n"
            << "untraced_seconds " << std::chrono::duration<double>(baseline).count() << "\n";
  if (report.total.count() > 0) {
    std::cout << "speedup "
              << static_cast<double>(baseline.count()) / static_cast<double>(report.total.count())
              << "\n";
  }
  if (!fraction.empty()) std::cout << "final_traced_fraction " << fraction.back().fraction << "\n";
  std::cout << std::setprecision(2) << "engine_us_per_task " << per_task_us << "\n";
  return kExitOk;
}

int cmd_replicate(const std::string& input, const EngineConfig& config,
                  const ReplicationConfig& replication, const std::string& out_dir) {
  const auto tasks = read_input(input);
  const auto run = run_replicated(tasks, config, replication);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (std::size_t n = 0; n < run.nodes.size(); ++n) {
      auto out = open_output(std::filesystem::path(out_dir) /
                             ("decisions.node" + std::to_string(n) + ".log"));
      write_decision_log(out, run.nodes[n].decisions);
    }
  }
  for (std::size_t n = 0; n < run.nodes.size(); ++n) {
    const auto& node = run.nodes[n];
    std::cout << "node " << n << " waits " << node.waits << " final_wait_count "
              << (node.wait_counts.empty() ? config.initial_wait_count
                                           : node.wait_counts.back().second)
              << "\n";
  }
  if (run.divergence) {
    std::cerr << "divergence: node " << run.divergence->node << " at token "
              << run.divergence->token_index << ": " << run.divergence->reason << "\n";
    return kExitDivergence;
  }
  std::cout << "identical across " << run.nodes.size() << " nodes\n";
  return kExitOk;
}

std::string describe(Token t, bool chars) {
  if (chars) return std::string(1, static_cast<char>(t.value));
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << t.value;
  return out.str();
}

std::string spell(std::span<const Token> s, bool chars) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!chars && i) out += ' ';
    out += describe(s[i], chars);
  }
  return out;
}

int cmd_repeats(const std::string& input, const std::string& chars, std::size_t min_len) {
  const bool use_chars = !chars.empty();
  TokenString s = use_chars ? tokens_from_chars(chars) : tokenize_stream(read_input(input));

  const auto suffixes = build_suffix_structures(s);
  std::cout << "# suffix array (rank sa lcp)\n";
  for (std::size_t i = 0; i < suffixes.sa.size(); ++i) {
    std::cout << i << ' ' << suffixes.sa[i] << ' ';
    if (i < suffixes.lcp.size()) {
      std::cout << suffixes.lcp[i];
    } else {
      std::cout << '-';
    }
    std::cout << '\n';
  }
  if (const auto longest = longest_disjoint_repeat(suffixes)) {
    std::cout << "# longest disjoint repeat: length " << longest->length << " at " << longest->first
              << "," << longest->second << '\n';
  }
  std::cout << "# candidates (length id start text)\n";
  for (const auto& c : repeat_candidates(s, suffixes, min_len)) {
    std::cout << c.length << ' ' << c.substring_id << ' ' << c.start << ' '
              << spell(std::span(s).subspan(c.start, c.length), use_chars) << '\n';
  }
  const auto result = find_repeats(s, min_len);
  std::cout << "# selected (length starts text)\n";
  for (const auto& r : result.repeats) {
    std::cout << r.length();
    for (auto st : r.starts) std::cout << (st == r.starts.front() ? " " : ",") << st;
    std::cout << ' ' << spell(r.tokens, use_chars) << '\n';
  }
  std::cout << "# coverage " << coverage_of(result) << " of " << s.size() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online trace identification for task streams"};
  app.require_subcommand(1);

  GeneratorSpec spec;
  std::string kind = "jacobi";
  std::string gen_output;
  auto* gen = app.add_subcommand("generate", "Write a synthetic task stream");
  gen->add_option("--kind", kind, "jacobi|periodic|periodic_with_noise|nested_loops|random")
      ->capture_default_str();
  gen->add_option("--iterations", spec.iterations)->capture_default_str();
  gen->add_option("--period", spec.period)->capture_default_str();
  gen->add_option("--inner-repeats", spec.inner_repeats)->capture_default_str();
  gen->add_option("--alphabet", spec.alphabet)->capture_default_str();
  gen->add_option("--length", spec.length)->capture_default_str();
  gen->add_option("--noise-rate", spec.noise_rate)->capture_default_str();
  gen->add_option("--seed", spec.seed)->capture_default_str();
  gen->add_option("-o,--output", gen_output, "Output file (default stdout)");

  EngineConfig run_config;
  CostFlags cost;
  std::size_t window = 5000;
  std::string run_input;
  std::string out_dir = "autotrace-out";
  auto* run = app.add_subcommand("run", "Run the engine over a task stream and write reports");
  run->add_option("input", run_input, "Task stream file, or - for stdin")->required();
  run->add_option("--out-dir", out_dir)->capture_default_str();
  run->add_option("--window", window, "Traced-fraction window")->capture_default_str();
  run->add_option("--alpha-ns", cost.alpha_ns)->capture_default_str();
  run->add_option("--alpha-m-ns", cost.alpha_m_ns)->capture_default_str();
  run->add_option("--alpha-r-ns", cost.alpha_r_ns)->capture_default_str();
  run->add_option("--replay-overhead-ns", cost.overhead_ns)->capture_default_str();
  add_engine_flags(run, run_config);

  EngineConfig rep_config;
  ReplicationConfig replication;
  std::string rep_input;
  std::string rep_out;
  auto* rep = app.add_subcommand("replicate", "Check that replicated nodes make identical decisions");
  rep->add_option("input", rep_input, "Task stream file, or - for stdin")->required();
  rep->add_option("--nodes", replication.nodes)->capture_default_str();
  rep->add_option("--seed", replication.seed, "Latency seed")->capture_default_str();
  rep->add_option("--max-latency", replication.max_latency, "Largest simulated job latency, in tokens")
      ->capture_default_str();
  rep->add_option("--out-dir", rep_out, "Write per-node decision logs here");
  add_engine_flags(rep, rep_config);

  std::string rp_input = "-";
  std::string rp_chars;
  std::size_t rp_min = 1;
  auto* rp = app.add_subcommand("repeats", "Dump repeat-miner candidates and selections");
  rp->add_option("input", rp_input, "Task stream file, or - for stdin")->capture_default_str();
  rp->add_option("--chars", rp_chars, "Mine this string, one token per character");
  rp->add_option("--min-trace-length", rp_min)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      auto k = parse_generator_kind(kind);
      if (!k) throw std::invalid_argument("unknown generator kind '" + kind + "'");
      spec.kind = *k;
      return cmd_generate(spec, gen_output);
    }
    if (*run) return cmd_run(run_input, run_config, cost, window, out_dir);
    if (*rep) return cmd_replicate(rep_input, rep_config, replication, rep_out);
    if (*rp) return cmd_repeats(rp_input, rp_chars, rp_min);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
