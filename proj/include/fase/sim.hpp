#pragma once

// Multi-process execution on one core: per-process traces run in time slices
// counted in trace events, and every switch between two different processes
// is a flush point.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "fase/cache.hpp"
#include "fase/flush.hpp"

namespace fase {

// Baseline is the unprotected system: no flush at switches.
enum class Mitigation { kBaseline, kNaive, kLlsf, kClsf };

std::string_view to_string(Mitigation mode);
std::optional<Mitigation> parse_mitigation(std::string_view text);
std::optional<FlushMode> flush_mode_of(Mitigation mode);

struct TraceEvent {
  enum class Kind { kLoad, kStore, kScfWrite, kForceState };

  Kind kind = Kind::kLoad;
  Address address = 0;
  bool scf_value = false;
  std::uint32_t set_index = 0;
  std::uint32_t way = 0;
  Coherence state = Coherence::kI;

  static TraceEvent load(Address a) { return {Kind::kLoad, a}; }
  static TraceEvent store(Address a) { return {Kind::kStore, a}; }
  static TraceEvent scf(bool v) { return {Kind::kScfWrite, 0, v}; }
  static TraceEvent force(std::uint32_t set_index, std::uint32_t way, Coherence state) {
    return {Kind::kForceState, 0, false, set_index, way, state};
  }

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Workload = std::map<Pid, std::vector<TraceEvent>>;

struct Process {
  Pid pid = 0;
  std::vector<TraceEvent> trace;
  std::size_t cursor = 0;
  bool csr_scf = false;    // live register
  bool saved_scf = false;  // value saved with the context at switch-out

  std::size_t remaining() const { return trace.size() - cursor; }
};

struct SliceConfig {
  std::uint64_t slice_length = 1000;  // events per slice
  std::vector<Pid> schedule;          // round-robin order
  std::uint64_t total_slices = 0;     // 0: run until every trace is exhausted

  friend bool operator==(const SliceConfig&, const SliceConfig&) = default;
};

struct SimConfig {
  CacheGeometry geometry;
  Mitigation mode = Mitigation::kBaseline;
  CostParams cost;
  Latencies latencies;
  SliceConfig slices;
  Cycles switch_overhead = 0;  // fixed non-flush cost added to every switch
  bool allow_force = false;    // accept synthetic force-state events

  // Cache, cost and latency rules; slice rules only when `for_run` is set.
  void validate(bool for_run = true) const;
};

struct SliceStats {
  std::uint64_t events_run = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  Cycles cycles = 0;
};

struct SwitchStats {
  std::optional<FlushReport> flush_report;
  Cycles switch_cycles = 0;
};

struct FlushRecord {
  std::uint64_t event_id = 0;
  Pid from = 0;
  Pid to = 0;
  FlushReport report;
};

struct ProcessStats {
  std::uint64_t events = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  Cycles cycles = 0;  // access latencies only

  friend bool operator==(const ProcessStats&, const ProcessStats&) = default;
};

struct SimReport {
  Mitigation mode = Mitigation::kBaseline;
  Cycles total_cycles = 0;
  Cycles access_cycles = 0;
  Cycles switch_cycles = 0;  // flush cycles plus fixed overhead
  Cycles flush_cycles = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t slices_run = 0;
  std::uint64_t switches = 0;
  Cycles cold_miss_penalty = 0;
  std::vector<FlushRecord> per_flush;
  std::map<Pid, ProcessStats> per_process;

  std::uint64_t lines_flushed() const;
  std::uint64_t lines_valid_at_flush() const;
  std::uint64_t writebacks_at_flush() const;
};

class Simulator {
 public:
  // Called with the cache state right before each flush event.
  using FlushObserver = std::function<void(const Cache&, Pid from, Pid to)>;

  explicit Simulator(SimConfig config);

  void add_process(Pid pid, std::vector<TraceEvent> trace = {});
  void append_events(Pid pid, std::span<const TraceEvent> events);

  // Runs up to `budget` events of `pid`. When `latencies` is non-null the
  // latency of every load/store is appended to it.
  SliceStats run_slice(Pid pid, std::uint64_t budget, std::vector<Cycles>* latencies = nullptr);

  // Saves and clears the outgoing register, flushes per the configured mode
  // and restores the incoming register.
  SwitchStats context_switch(Pid from, Pid to);

  // Drives the configured schedule until traces run out or the slice limit
  // is reached.
  SimReport run();

  Cycles cold_cache_penalty() const { return report_.cold_miss_penalty; }
  const SimReport& report() const { return report_; }
  const SimConfig& config() const { return config_; }
  const Cache& cache() const { return cache_; }
  Cache& cache() { return cache_; }
  const Process& process(Pid pid) const;

  void set_flush_observer(FlushObserver observer) { observer_ = std::move(observer); }

 private:
  Process& process_mut(Pid pid);
  void account_access(Pid pid, const AccessResult& result, std::uint64_t tag,
                      std::uint32_t set_index);

  SimConfig config_;
  Cache cache_;
  std::map<Pid, Process> processes_;
  SimReport report_;
  // Blocks invalidated by a flush and not accessed by their owner since.
  std::set<FlushedBlock> recently_flushed_;
  FlushObserver observer_;
};

// Validates the config, registers every process of the workload, and runs it.
SimReport run_simulation(const SimConfig& config, const Workload& workload);

}  // namespace fase
