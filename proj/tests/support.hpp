#pragma once

// Seeded generators shared by the unit and acceptance suites.

#include <cstdint>
#include <random>
#include <vector>

#include "fase/cache.hpp"
#include "fase/sim.hpp"

namespace fase::testing {

inline Address block_addr(const CacheGeometry& g, std::uint64_t tag, std::uint32_t set) {
  return recompose(AddrParts{tag, set, 0}, g);
}

// Loads and stores over a small per-process tag pool so that hits, conflicts
// and dirty lines all show up. Optionally sprinkles scf writes.
inline std::vector<TraceEvent> random_trace(std::mt19937_64& rng, const CacheGeometry& g,
                                            std::size_t length, std::uint64_t tag_pool,
                                            bool with_scf) {
  std::uniform_int_distribution<std::uint64_t> tag(0, tag_pool - 1);
  std::uniform_int_distribution<std::uint32_t> set(0, g.num_sets - 1);
  std::uniform_int_distribution<std::uint32_t> offset(0, g.block_bytes - 1);
  std::uniform_int_distribution<int> kind(0, 99);
  std::vector<TraceEvent> trace;
  trace.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const int k = kind(rng);
    if (with_scf && k < 5) {
      trace.push_back(TraceEvent::scf(k < 3));
      continue;
    }
    const Address a = block_addr(g, tag(rng), set(rng)) + offset(rng);
    trace.push_back(k < 70 ? TraceEvent::load(a) : TraceEvent::store(a));
  }
  return trace;
}

}  // namespace fase::testing
