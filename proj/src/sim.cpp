#include "fase/sim.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "fase/errors.hpp"

namespace fase {

std::string_view to_string(Mitigation mode) {
  switch (mode) {
    case Mitigation::kBaseline: return "baseline";
    case Mitigation::kNaive: return "naive";
    case Mitigation::kLlsf: return "llsf";
    case Mitigation::kClsf: return "clsf";
  }
  return "?";
}

std::optional<Mitigation> parse_mitigation(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Mitigation m : {Mitigation::kBaseline, Mitigation::kNaive, Mitigation::kLlsf,
                       Mitigation::kClsf}) {
    if (lower == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<FlushMode> flush_mode_of(Mitigation mode) {
  switch (mode) {
    case Mitigation::kBaseline: return std::nullopt;
    case Mitigation::kNaive: return FlushMode::kNaive;
    case Mitigation::kLlsf: return FlushMode::kLlsf;
    case Mitigation::kClsf: return FlushMode::kClsf;
  }
  return std::nullopt;
}

void SimConfig::validate(bool for_run) const {
  geometry.validate();
  cost.validate();
  latencies.validate();
  if (!for_run) return;
  if (slices.slice_length < 1) throw ConfigError("slice_length must be >= 1");
  if (slices.schedule.empty()) throw ConfigError("schedule must not be empty");
}

std::uint64_t SimReport::lines_flushed() const {
  std::uint64_t n = 0;
  for (const auto& f : per_flush) n += f.report.lines_flushed;
  return n;
}

std::uint64_t SimReport::lines_valid_at_flush() const {
  std::uint64_t n = 0;
  for (const auto& f : per_flush) n += f.report.lines_valid_before;
  return n;
}

std::uint64_t SimReport::writebacks_at_flush() const {
  std::uint64_t n = 0;
  for (const auto& f : per_flush) n += f.report.writebacks;
  return n;
}

Simulator::Simulator(SimConfig config)
    : config_(std::move(config)), cache_(config_.geometry, config_.latencies) {
  report_.mode = config_.mode;
}

void Simulator::add_process(Pid pid, std::vector<TraceEvent> trace) {
  if (processes_.count(pid) != 0) {
    throw ConfigError("process " + std::to_string(pid) + " registered twice");
  }
  Process p;
  p.pid = pid;
  p.trace = std::move(trace);
  processes_.emplace(pid, std::move(p));
  cache_.register_process(pid);
  report_.per_process[pid];
}

void Simulator::append_events(Pid pid, std::span<const TraceEvent> events) {
  Process& p = process_mut(pid);
  p.trace.insert(p.trace.end(), events.begin(), events.end());
}

const Process& Simulator::process(Pid pid) const {
  auto it = processes_.find(pid);
  if (it == processes_.end()) throw ConfigError("unknown pid " + std::to_string(pid));
  return it->second;
}

Process& Simulator::process_mut(Pid pid) {
  auto it = processes_.find(pid);
  if (it == processes_.end()) throw ConfigError("unknown pid " + std::to_string(pid));
  return it->second;
}

void Simulator::account_access(Pid pid, const AccessResult& result, std::uint64_t tag,
                               std::uint32_t set_index) {
  // A flushed block stays attributable until its owner next touches it. A
  // block can only be flushed again after being refilled, so each flush is
  // charged at most once per block.
  auto it = recently_flushed_.find(FlushedBlock{pid, tag, set_index});
  if (it != recently_flushed_.end()) {
    if (!result.hit) report_.cold_miss_penalty += config_.latencies.miss - config_.latencies.hit;
    recently_flushed_.erase(it);
  }
}

SliceStats Simulator::run_slice(Pid pid, std::uint64_t budget, std::vector<Cycles>* latencies) {
  Process& p = process_mut(pid);
  ProcessStats& ps = report_.per_process[pid];
  SliceStats stats;
  while (stats.events_run < budget && p.cursor < p.trace.size()) {
    const TraceEvent& ev = p.trace[p.cursor];
    switch (ev.kind) {
      case TraceEvent::Kind::kLoad:
      case TraceEvent::Kind::kStore: {
        const AccessOp op =
            ev.kind == TraceEvent::Kind::kLoad ? AccessOp::kLoad : AccessOp::kStore;
        const AccessResult r = cache_.access(pid, op, ev.address, p.csr_scf);
        const AddrParts parts = decompose(ev.address, config_.geometry);
        if (!recently_flushed_.empty()) account_access(pid, r, parts.tag, parts.set_index);
        stats.cycles += r.latency;
        (r.hit ? stats.hits : stats.misses) += 1;
        if (latencies != nullptr) latencies->push_back(r.latency);
        break;
      }
      case TraceEvent::Kind::kScfWrite:
        p.csr_scf = ev.scf_value;
        break;
      case TraceEvent::Kind::kForceState:
        if (!config_.allow_force) {
          throw ConfigError("force-state events are only accepted in test traces");
        }
        cache_.force_state(pid, ev.set_index, ev.way, ev.state);
        break;
    }
    ++p.cursor;
    ++stats.events_run;
  }
  ps.events += stats.events_run;
  ps.hits += stats.hits;
  ps.misses += stats.misses;
  ps.cycles += stats.cycles;
  report_.hits += stats.hits;
  report_.misses += stats.misses;
  report_.access_cycles += stats.cycles;
  report_.total_cycles += stats.cycles;
  return stats;
}

SwitchStats Simulator::context_switch(Pid from, Pid to) {
  Process& out = process_mut(from);
  out.saved_scf = out.csr_scf;
  out.csr_scf = false;

  SwitchStats stats;
  if (auto mode = flush_mode_of(config_.mode)) {
    if (observer_) observer_(cache_, from, to);
    std::vector<FlushedBlock> flushed;
    FlushReport fr = flush(cache_, *mode, config_.cost, &flushed);
    recently_flushed_.insert(flushed.begin(), flushed.end());
    report_.per_flush.push_back({report_.per_flush.size(), from, to, fr});
    report_.flush_cycles += fr.cycles;
    stats.switch_cycles += fr.cycles;
    stats.flush_report = fr;
  }
  stats.switch_cycles += config_.switch_overhead;

  Process& in = process_mut(to);
  in.csr_scf = in.saved_scf;

  ++report_.switches;
  report_.switch_cycles += stats.switch_cycles;
  report_.total_cycles += stats.switch_cycles;
  return stats;
}

SimReport Simulator::run() {
  const auto& schedule = config_.slices.schedule;
  std::optional<Pid> last;
  std::size_t pos = 0;
  while (config_.slices.total_slices == 0 || report_.slices_run < config_.slices.total_slices) {
    std::optional<Pid> next;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const Pid candidate = schedule[(pos + i) % schedule.size()];
      if (process(candidate).remaining() > 0) {
        next = candidate;
        pos = (pos + i + 1) % schedule.size();
        break;
      }
    }
    if (!next) break;
    if (last && *last != *next) context_switch(*last, *next);
    run_slice(*next, config_.slices.slice_length);
    ++report_.slices_run;
    last = next;
  }
  return report_;
}

SimReport run_simulation(const SimConfig& config, const Workload& workload) {
  config.validate();
  Simulator sim(config);
  for (Pid pid : config.slices.schedule) {
    if (sim.cache().is_registered(pid)) continue;
    auto it = workload.find(pid);
    sim.add_process(pid, it == workload.end() ? std::vector<TraceEvent>{} : it->second);
  }
  for (const auto& [pid, trace] : workload) {
    if (!sim.cache().is_registered(pid)) {
      throw ConfigError("trace pid " + std::to_string(pid) + " does not appear in the schedule");
    }
    if (!config.allow_force) {
      for (const auto& ev : trace) {
        if (ev.kind == TraceEvent::Kind::kForceState) {
          throw ConfigError("force-state events require allow_force=1");
        }
      }
    }
  }
  return sim.run();
}

}  // namespace fase
