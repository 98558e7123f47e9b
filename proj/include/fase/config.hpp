#pragma once

// Line-oriented text inputs: key=value run configuration and per-process
// access traces.
//
// Config keys: sets, ways, block_bytes, mode, alpha, beta, hit_latency,
// miss_latency, slice_length, schedule, total_slices, switch_overhead, seed,
// output_dir, allow_force. Blank lines and '#' comments are ignored.
//
// Trace lines:
//   PID load 0xADDR
//   PID store 0xADDR
//   PID scf 0|1
//   PID force SET WAY STATE     (only with allow_force=1)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "fase/sim.hpp"

namespace fase {

struct RunConfig {
  SimConfig sim;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

// Parses and validates cache, cost and latency rules. Throws ParseError with
// the offending line for syntax or range problems.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Canonical key=value text; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& config);

// Appends the events of one trace file to `workload` (file order is kept per
// pid).
void parse_trace(std::istream& in, Workload& workload, const std::string& source = "<trace>");
void load_trace(const std::filesystem::path& path, Workload& workload);

}  // namespace fase
