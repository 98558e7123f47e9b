#include "fase/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "fase/attack.hpp"
#include "fase/config.hpp"
#include "fase/errors.hpp"
#include "fase/report.hpp"

namespace fase {

namespace {

namespace fs = std::filesystem;

// FASE_SIM_LOG: unset/0/off is silent, anything else logs progress to stderr.
class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {
    const char* v = std::getenv("FASE_SIM_LOG");
    enabled_ = v != nullptr && *v != '\0' && std::string_view(v) != "0" &&
               std::string_view(v) != "off";
  }
  void info(const std::string& msg) const {
    if (enabled_) err_ << "[fase_sim] " << msg << '\n';
  }

 private:
  std::ostream& err_;
  bool enabled_ = false;
};

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> trace_paths;
  std::string mode;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

Mitigation mode_or_throw(const std::string& text) {
  auto m = parse_mitigation(text);
  if (!m) throw ConfigError("unknown mode '" + text + "' (baseline, naive, llsf, clsf)");
  return *m;
}

RunConfig load_run_config(const CommonOptions& opts) {
  RunConfig cfg = load_config(opts.config_path);
  if (!opts.mode.empty()) cfg.sim.mode = mode_or_throw(opts.mode);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

Workload load_workload(const std::vector<std::string>& paths) {
  Workload w;
  for (const auto& p : paths) load_trace(p, w);
  return w;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  writer(out);
}

int cmd_simulate(const CommonOptions& opts, std::ostream& out, const Log& log) {
  const RunConfig cfg = load_run_config(opts);
  const Workload workload = load_workload(opts.trace_paths);
  log.info("simulating mode " + std::string(to_string(cfg.sim.mode)));
  const SimReport report = run_simulation(cfg.sim, workload);
  const fs::path dir = cfg.output_dir;
  write_sim_report(dir, report);
  write_file(dir / "config.echo", [&](std::ostream& o) { o << format_config(cfg); });
  write_summary_csv(out, report);
  return kExitOk;
}

struct AttackOptions {
  std::string secret;
  std::uint32_t samples = 100;
  std::optional<double> threshold;
  Cycles noise = 0;
  std::uint32_t accesses_per_set = 1;
  bool non_critical = false;
};

std::vector<std::uint32_t> parse_secret(const std::string& text) {
  std::vector<std::uint32_t> sets;
  for (const auto& item : split_list(text)) {
    std::uint64_t v = 0;
    std::istringstream in(item);
    if (!(in >> v) || !in.eof() || v > UINT32_MAX) {
      throw ConfigError("invalid secret set index '" + item + "'");
    }
    sets.push_back(static_cast<std::uint32_t>(v));
  }
  return sets;
}

int cmd_attack(const CommonOptions& opts, const AttackOptions& a, std::ostream& out,
               const Log& log) {
  const RunConfig cfg = load_run_config(opts);
  AttackConfig ac;
  ac.geometry = cfg.sim.geometry;
  ac.latencies = cfg.sim.latencies;
  ac.cost = cfg.sim.cost;
  ac.mode = cfg.sim.mode;
  ac.samples = a.samples;
  ac.victim.secret = parse_secret(a.secret);
  ac.victim.accesses_per_set = a.accesses_per_set;
  ac.victim.critical = !a.non_critical;
  ac.noise = NoiseModel{a.noise, cfg.seed};
  ac.validate();

  log.info("prime+probe, mode " + std::string(to_string(ac.mode)) + ", " +
           std::to_string(ac.samples) + " samples");
  const ProbeMatrix matrix = run_prime_probe(ac);
  const LeakageScore score =
      infer_secret(matrix, ac.victim.secret, a.threshold.value_or(default_threshold(ac.latencies)));

  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  write_file(dir / "probe_matrix.csv", [&](std::ostream& o) { write_probe_matrix_csv(o, matrix); });
  write_file(dir / "leakage.csv", [&](std::ostream& o) { write_leakage_csv(o, score); });
  write_leakage_csv(out, score);
  return kExitOk;
}

int cmd_compare(const CommonOptions& opts, const std::string& modes_text, std::ostream& out,
                const Log& log) {
  const RunConfig cfg = load_run_config(opts);
  std::vector<Mitigation> modes;
  for (const auto& m : split_list(modes_text)) modes.push_back(mode_or_throw(m));
  const Workload workload = load_workload(opts.trace_paths);
  log.info("comparing " + std::to_string(modes.size()) + " modes");
  const ComparisonReport cmp = compare_modes(cfg.sim, workload, modes);

  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  for (const auto& m : cmp.modes) write_sim_report(dir / std::string(to_string(m.mode)), m.report);
  write_file(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, cmp); });
  write_file(dir / "config.echo", [&](std::ostream& o) { o << format_config(cfg); });
  write_comparison_csv(out, cmp);
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool traces) {
  cmd->add_option("--config", opts.config_path, "key=value run configuration")->required();
  if (traces) {
    cmd->add_option("--trace", opts.trace_paths, "trace file (repeatable)")->required();
  }
  cmd->add_option("--out", opts.out_dir, "output directory (overrides output_dir)");
  cmd->add_option("--seed", opts.seed, "seed (overrides config seed)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selective cache flush simulator and Prime+Probe harness", "fase_sim"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "run a trace-driven simulation");
  add_common(simulate, sim_opts, true);
  simulate->add_option("--mode", sim_opts.mode, "baseline|naive|llsf|clsf (overrides config)");

  CommonOptions atk_opts;
  AttackOptions atk;
  auto* attack = app.add_subcommand("attack", "mount Prime+Probe and score leakage");
  add_common(attack, atk_opts, false);
  attack->add_option("--mode", atk_opts.mode, "baseline|naive|llsf|clsf (overrides config)");
  attack->add_option("--secret", atk.secret, "comma-separated victim set indices");
  attack->add_option("--samples", atk.samples, "prime/probe rounds")->default_val(100);
  attack->add_option("--threshold", atk.threshold,
                     "cycles above the quietest set that mark a set as accessed");
  attack->add_option("--noise", atk.noise, "uniform +-cycles added to each probe sum");
  attack->add_option("--accesses-per-set", atk.accesses_per_set, "victim lines per secret set")
      ->default_val(1);
  attack->add_flag("--non-critical", atk.non_critical,
                   "do not bracket the victim with scf writes");

  CommonOptions cmp_opts;
  std::string modes_text;
  auto* compare = app.add_subcommand("compare", "run several modes on identical traces");
  add_common(compare, cmp_opts, true);
  compare->add_option("--modes", modes_text, "comma-separated modes")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  const Log log(err);
  try {
    if (*simulate) return cmd_simulate(sim_opts, out, log);
    if (*attack) return cmd_attack(atk_opts, atk, out, log);
    if (*compare) return cmd_compare(cmp_opts, modes_text, out, log);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace fase
