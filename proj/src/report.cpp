#include "fase/report.hpp"

#include <future>
#include <iomanip>
#include <fstream>
#include <ostream>

#include "fase/errors.hpp"

namespace fase {

void write_summary_csv(std::ostream& out, const SimReport& r) {
  out << "mode,total_cycles,access_cycles,switch_cycles,flush_cycles,hits,misses,slices,"
         "switches,flush_events,lines_flushed,writebacks,cold_miss_penalty\n";
  out << to_string(r.mode) << ',' << r.total_cycles << ',' << r.access_cycles << ','
      << r.switch_cycles << ',' << r.flush_cycles << ',' << r.hits << ',' << r.misses << ','
      << r.slices_run << ',' << r.switches << ',' << r.per_flush.size() << ','
      << r.lines_flushed() << ',' << r.writebacks_at_flush() << ',' << r.cold_miss_penalty
      << '\n';
}

void write_per_flush_csv(std::ostream& out, const SimReport& r) {
  write_flush_csv_header(out);
  const auto mode = flush_mode_of(r.mode);
  if (!mode) return;
  for (const FlushRecord& f : r.per_flush) write_flush_csv_row(out, f.event_id, *mode, f.report);
}

void write_per_process_csv(std::ostream& out, const SimReport& r) {
  out << "pid,events,hits,misses,cycles\n";
  for (const auto& [pid, s] : r.per_process) {
    out << pid << ',' << s.events << ',' << s.hits << ',' << s.misses << ',' << s.cycles << '\n';
  }
}

namespace {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  writer(out);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_sim_report(const std::filesystem::path& dir, const SimReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, report); });
  write_file(dir / "flushes.csv", [&](std::ostream& o) { write_per_flush_csv(o, report); });
  write_file(dir / "processes.csv", [&](std::ostream& o) { write_per_process_csv(o, report); });
}

const ModeComparison* ComparisonReport::find(Mitigation mode) const {
  for (const auto& m : modes) {
    if (m.mode == mode) return &m;
  }
  return nullptr;
}

ComparisonReport compare_modes(const SimConfig& config, const Workload& workload,
                               const std::vector<Mitigation>& modes) {
  if (modes.size() < 2) throw ConfigError("compare needs at least two modes");
  config.validate();

  auto launch = [&](Mitigation m) {
    SimConfig c = config;
    c.mode = m;
    return std::async(std::launch::async, [c, &workload] { return run_simulation(c, workload); });
  };
  auto baseline_future = launch(Mitigation::kBaseline);
  std::vector<std::future<SimReport>> futures;
  futures.reserve(modes.size());
  for (Mitigation m : modes) futures.push_back(launch(m));

  ComparisonReport out;
  out.baseline_cycles = baseline_future.get().total_cycles;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    ModeComparison mc;
    mc.mode = modes[i];
    mc.report = futures[i].get();
    if (out.baseline_cycles != 0) {
      mc.overhead = (static_cast<double>(mc.report.total_cycles) -
                     static_cast<double>(out.baseline_cycles)) /
                    static_cast<double>(out.baseline_cycles);
    }
    const std::uint64_t valid = mc.report.lines_valid_at_flush();
    if (!mc.report.per_flush.empty()) {
      mc.flush_savings =
          valid == 0 ? 0.0
                     : 1.0 - static_cast<double>(mc.report.lines_flushed()) /
                                 static_cast<double>(valid);
    }
    out.modes.push_back(std::move(mc));
  }
  return out;
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
  out << "mode,total_cycles,overhead_pct,flush_events,lines_flushed,writebacks,flush_cycles,"
         "cold_miss_penalty,flush_savings\n";
  out << std::fixed;
  for (const auto& m : report.modes) {
    const SimReport& r = m.report;
    out << to_string(m.mode) << ',' << r.total_cycles << ',' << std::setprecision(3)
        << m.overhead * 100.0 << ',' << r.per_flush.size() << ',' << r.lines_flushed() << ','
        << r.writebacks_at_flush() << ',' << r.flush_cycles << ',' << r.cold_miss_penalty << ',';
    if (m.flush_savings) {
      out << std::setprecision(4) << *m.flush_savings;
    } else {
      out << "n/a";
    }
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace fase
