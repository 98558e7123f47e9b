#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fase/sim.hpp"

namespace fase {

void write_summary_csv(std::ostream& out, const SimReport& report);
void write_per_flush_csv(std::ostream& out, const SimReport& report);
void write_per_process_csv(std::ostream& out, const SimReport& report);

// summary.csv, flushes.csv and processes.csv under `dir` (created if needed).
void write_sim_report(const std::filesystem::path& dir, const SimReport& report);

struct ModeComparison {
  Mitigation mode = Mitigation::kBaseline;
  SimReport report;
  // (total - baseline_total) / baseline_total; 0 when the baseline is 0.
  double overhead = 0.0;
  // 1 - lines_flushed / lines a naive flush would have invalidated on the
  // same pre-flush states. Empty for modes without flush events.
  std::optional<double> flush_savings;
};

struct ComparisonReport {
  Cycles baseline_cycles = 0;
  std::vector<ModeComparison> modes;

  const ModeComparison* find(Mitigation mode) const;
};

// Runs every mode on the same workload (concurrently) against a baseline run.
ComparisonReport compare_modes(const SimConfig& config, const Workload& workload,
                               const std::vector<Mitigation>& modes);

void write_comparison_csv(std::ostream& out, const ComparisonReport& report);

}  // namespace fase
