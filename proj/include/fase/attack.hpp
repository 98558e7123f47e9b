#pragma once

// Prime+Probe against a victim whose secret is the set of cache sets it
// touches. Each sample is: attacker primes every line, switch to victim,
// victim runs, switch back, attacker re-times its prime data per set.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fase/cache.hpp"
#include "fase/flush.hpp"
#include "fase/sim.hpp"

namespace fase {

struct VictimModel {
  std::vector<std::uint32_t> secret;  // set indices the victim touches
  std::uint32_t accesses_per_set = 1;
  bool critical = false;  // bracket the accesses with scf 1 / scf 0
};

struct ProbeMatrix {
  std::uint32_t samples = 0;
  std::uint32_t num_sets = 0;
  std::vector<Cycles> latencies;  // row-major, samples x num_sets

  Cycles at(std::uint32_t sample, std::uint32_t set) const {
    return latencies[std::size_t{sample} * num_sets + set];
  }
  std::vector<double> set_means() const;

  friend bool operator==(const ProbeMatrix&, const ProbeMatrix&) = default;
};

struct LeakageScore {
  std::vector<std::uint32_t> recovered;
  std::vector<std::uint32_t> secret;
  double accuracy = 0.0;
  bool exact = false;  // recovered == secret
};

// Uniform +-epsilon cycles added to each per-set probe sum, seeded.
struct NoiseModel {
  Cycles epsilon = 0;
  std::uint64_t seed = 0;
};

struct AttackConfig {
  CacheGeometry geometry;
  Latencies latencies;
  CostParams cost;
  Mitigation mode = Mitigation::kBaseline;
  VictimModel victim;
  std::uint32_t samples = 100;
  Pid attacker_pid = 1;
  Pid victim_pid = 2;
  NoiseModel noise;

  void validate() const;
};

inline constexpr std::uint64_t kAttackerTagBase = 0x1000;
inline constexpr std::uint64_t kVictimTagBase = 0x8000;

// One load per set and way. Within each set the ways are visited in
// ascending order, so way 0's block ends up least recently used.
std::vector<TraceEvent> prime(const CacheGeometry& geometry,
                              std::uint64_t tag_base = kAttackerTagBase);

// The prime addresses in reverse way order. Probing in priming order would
// make each miss evict the attacker's own next block under LRU.
std::vector<TraceEvent> probe_events(const CacheGeometry& geometry,
                                     std::uint64_t tag_base = kAttackerTagBase);

// Runs the probe as one attacker slice and returns the per-set sum of its
// access latencies.
std::vector<Cycles> probe(Simulator& sim, Pid attacker,
                          std::uint64_t tag_base = kAttackerTagBase);

// Scf-bracketed when the victim is critical.
std::vector<TraceEvent> victim_events(const CacheGeometry& geometry, const VictimModel& victim);

// Runs `samples` rounds through the simulator and returns one row per round.
ProbeMatrix run_prime_probe(const AttackConfig& config);

// Same protocol with an arbitrary victim trace per sample (may be empty).
ProbeMatrix run_prime_probe(const AttackConfig& config,
                            const std::vector<std::vector<TraceEvent>>& victim_traces);

// Default classification margin: half the hit/miss gap above the quietest set.
double default_threshold(const Latencies& latencies);

// A set counts as victim-accessed when its mean probe latency exceeds the
// quietest set's mean by more than `threshold` cycles. A matrix where every
// set reads alike yields nothing.
LeakageScore infer_secret(const ProbeMatrix& matrix, std::vector<std::uint32_t> secret,
                          double threshold);

void write_probe_matrix_csv(std::ostream& out, const ProbeMatrix& matrix);
void write_leakage_csv(std::ostream& out, const LeakageScore& score);

}  // namespace fase
