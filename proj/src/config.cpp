#include "fase/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "fase/errors.hpp"

namespace fase {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return hash == std::string_view::npos ? s : s.substr(0, hash);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Decimal, or hexadecimal with a 0x prefix.
std::optional<std::uint64_t> parse_u64(std::string_view s) {
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  return std::nullopt;
}

struct LineContext {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source, line, what); }

  std::uint64_t number(std::string_view key, std::string_view value) const {
    auto v = parse_u64(value);
    if (!v) fail(std::string(key) + ": expected a non-negative integer, got '" + std::string(value) + "'");
    return *v;
  }

  std::uint32_t number32(std::string_view key, std::string_view value) const {
    const std::uint64_t v = number(key, value);
    if (v > UINT32_MAX) fail(std::string(key) + ": value out of range");
    return static_cast<std::uint32_t>(v);
  }
};

std::vector<Pid> parse_schedule(const LineContext& ctx, std::string_view value) {
  std::vector<Pid> pids;
  std::string normalized(value);
  for (char& c : normalized) {
    if (c == ',') c = ' ';
  }
  for (std::string_view tok : split_ws(normalized)) pids.push_back(ctx.number32("schedule", tok));
  return pids;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  const SimConfig& x = a.sim;
  const SimConfig& y = b.sim;
  return x.geometry == y.geometry && x.mode == y.mode && x.cost == y.cost &&
         x.latencies == y.latencies && x.slices == y.slices &&
         x.switch_overhead == y.switch_overhead && x.allow_force == y.allow_force &&
         a.seed == b.seed && a.output_dir == b.output_dir;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  SimConfig& sim = cfg.sim;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t last_line = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    last_line = line_no;
    const LineContext ctx{source, line_no};
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) ctx.fail("expected key=value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "sets") {
      sim.geometry.num_sets = ctx.number32(key, value);
    } else if (key == "ways") {
      sim.geometry.num_ways = ctx.number32(key, value);
    } else if (key == "block_bytes") {
      sim.geometry.block_bytes = ctx.number32(key, value);
    } else if (key == "mode") {
      auto m = parse_mitigation(value);
      if (!m) ctx.fail("mode must be one of baseline, naive, llsf, clsf");
      sim.mode = *m;
    } else if (key == "alpha") {
      sim.cost.alpha = ctx.number(key, value);
    } else if (key == "beta") {
      sim.cost.beta = ctx.number(key, value);
    } else if (key == "hit_latency") {
      sim.latencies.hit = ctx.number(key, value);
    } else if (key == "miss_latency") {
      sim.latencies.miss = ctx.number(key, value);
    } else if (key == "slice_length") {
      sim.slices.slice_length = ctx.number(key, value);
      if (sim.slices.slice_length < 1) ctx.fail("slice_length must be >= 1");
    } else if (key == "schedule") {
      sim.slices.schedule = parse_schedule(ctx, value);
    } else if (key == "total_slices") {
      sim.slices.total_slices = ctx.number(key, value);
    } else if (key == "switch_overhead") {
      sim.switch_overhead = ctx.number(key, value);
    } else if (key == "seed") {
      cfg.seed = ctx.number(key, value);
    } else if (key == "output_dir") {
      cfg.output_dir = std::string(value);
    } else if (key == "allow_force") {
      auto b = parse_bool(value);
      if (!b) ctx.fail("allow_force must be 0 or 1");
      sim.allow_force = *b;
    } else {
      ctx.fail("unknown key '" + std::string(key) + "'");
    }
  }

  // Cross-field rules; reported against the last meaningful line.
  try {
    sim.validate(/*for_run=*/false);
  } catch (const ConfigError& e) {
    throw ParseError(source, last_line == 0 ? 1 : last_line, e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

std::string format_config(const RunConfig& config) {
  const SimConfig& s = config.sim;
  std::ostringstream out;
  out << "sets=" << s.geometry.num_sets << '\n'
      << "ways=" << s.geometry.num_ways << '\n'
      << "block_bytes=" << s.geometry.block_bytes << '\n'
      << "mode=" << to_string(s.mode) << '\n'
      << "alpha=" << s.cost.alpha << '\n'
      << "beta=" << s.cost.beta << '\n'
      << "hit_latency=" << s.latencies.hit << '\n'
      << "miss_latency=" << s.latencies.miss << '\n'
      << "slice_length=" << s.slices.slice_length << '\n'
      << "schedule=";
  for (std::size_t i = 0; i < s.slices.schedule.size(); ++i) {
    if (i != 0) out << ',';
    out << s.slices.schedule[i];
  }
  out << '\n'
      << "total_slices=" << s.slices.total_slices << '\n'
      << "switch_overhead=" << s.switch_overhead << '\n'
      << "seed=" << config.seed << '\n'
      << "output_dir=" << config.output_dir << '\n'
      << "allow_force=" << (s.allow_force ? 1 : 0) << '\n';
  return out.str();
}

void parse_trace(std::istream& in, Workload& workload, const std::string& source) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const LineContext ctx{source, line_no};
    const auto tok = split_ws(line);
    if (tok.size() < 2) ctx.fail("expected 'PID OP ...'");
    const Pid pid = ctx.number32("pid", tok[0]);
    const std::string_view op = tok[1];
    TraceEvent ev;
    if (op == "load" || op == "store") {
      if (tok.size() != 3) ctx.fail(std::string(op) + " takes one address");
      const std::uint64_t addr = ctx.number("address", tok[2]);
      ev = op == "load" ? TraceEvent::load(addr) : TraceEvent::store(addr);
    } else if (op == "scf") {
      if (tok.size() != 3 || (tok[2] != "0" && tok[2] != "1")) ctx.fail("scf takes 0 or 1");
      ev = TraceEvent::scf(tok[2] == "1");
    } else if (op == "force") {
      if (tok.size() != 5) ctx.fail("force takes SET WAY STATE");
      auto state = parse_coherence(tok[4]);
      if (!state) ctx.fail("force state must be one of M, E, S, I");
      ev = TraceEvent::force(ctx.number32("set", tok[2]), ctx.number32("way", tok[3]), *state);
    } else {
      ctx.fail("unknown operation '" + std::string(op) + "'");
    }
    workload[pid].push_back(ev);
  }
}

void load_trace(const std::filesystem::path& path, Workload& workload) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file " + path.string());
  parse_trace(in, workload, path.string());
}

}  // namespace fase
