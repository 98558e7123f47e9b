#pragma once

// Set-associative L1 data cache model. Only metadata is simulated: every line
// carries an owner-tagged address tag, a MESI coherence state, the per-line
// selective-flush state bit, and an LRU rank. The cache also holds the single
// cache-wide critical-segment flag.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fase {

using Address = std::uint64_t;
using Cycles = std::uint64_t;
using Pid = std::uint32_t;

struct CacheGeometry {
  std::uint32_t num_sets = 64;
  std::uint32_t num_ways = 8;
  std::uint32_t block_bytes = 64;

  std::uint64_t num_lines() const { return std::uint64_t{num_sets} * num_ways; }
  std::uint64_t capacity_bytes() const { return num_lines() * block_bytes; }

  // Throws ConfigError unless every field is a power of two.
  void validate() const;

  friend bool operator==(const CacheGeometry&, const CacheGeometry&) = default;
};

// Two-bit encodings match the tag-array layout: M=11, E=10, S=01, I=00.
enum class Coherence : std::uint8_t { kI = 0b00, kS = 0b01, kE = 0b10, kM = 0b11 };

inline bool is_valid(Coherence c) { return c != Coherence::kI; }
inline bool is_dirty(Coherence c) { return c == Coherence::kM; }

char coherence_letter(Coherence c);
// Accepts "M", "E", "S", "I" (case-insensitive). Empty optional otherwise.
std::optional<Coherence> parse_coherence(std::string_view text);

struct LineMeta {
  Pid owner = 0;
  std::uint64_t tag = 0;
  Coherence coherence = Coherence::kI;
  bool fase = false;
  // 0 is most recently used; ranks within a set are a permutation of 0..ways-1.
  std::uint32_t recency = 0;

  bool valid() const { return is_valid(coherence); }

  friend bool operator==(const LineMeta&, const LineMeta&) = default;
};

struct AddrParts {
  std::uint64_t tag = 0;
  std::uint32_t set_index = 0;
  std::uint32_t offset = 0;

  friend bool operator==(const AddrParts&, const AddrParts&) = default;
};

AddrParts decompose(Address address, const CacheGeometry& geometry);
Address recompose(const AddrParts& parts, const CacheGeometry& geometry);

struct Latencies {
  Cycles hit = 30;
  Cycles miss = 120;

  // Misses must read above the 100-cycle line and hits below it.
  void validate() const;

  friend bool operator==(const Latencies&, const Latencies&) = default;
};

enum class AccessOp { kLoad, kStore };

struct AccessResult {
  bool hit = false;
  Cycles latency = 0;
  bool writeback_occurred = false;
  // Set when a valid line was displaced by the fill.
  std::optional<LineMeta> evicted;
  // Whether this access changed any coherence bits (fill or upgrade to M).
  bool coherence_updated = false;
};

// Lossless copy of the cache metadata, set-major then way-minor.
struct Snapshot {
  CacheGeometry geometry;
  std::vector<LineMeta> lines;
  bool clsf_flag = false;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

class Cache {
 public:
  explicit Cache(CacheGeometry geometry, Latencies latencies = {});

  const CacheGeometry& geometry() const { return geometry_; }
  const Latencies& latencies() const { return latencies_; }

  void register_process(Pid pid);
  bool is_registered(Pid pid) const;

  // Services one load or store. `critical` is the live value of the
  // requesting process's critical-segment register.
  AccessResult access(Pid pid, AccessOp op, Address address, bool critical = false);

  // Invalid way with the lowest index if any, otherwise the LRU way.
  std::uint32_t select_victim_way(std::uint32_t set_index) const;

  // Overwrites the coherence state of one line on behalf of `pid`. Only used
  // by synthetic test traces to reach states (e.g. S) that single-core
  // traffic never produces. The fase bit is left as is unless the line is
  // forced to I, in which case it is cleared.
  void force_state(Pid pid, std::uint32_t set_index, std::uint32_t way, Coherence state);

  const LineMeta& line(std::uint32_t set_index, std::uint32_t way) const;
  LineMeta& line(std::uint32_t set_index, std::uint32_t way);
  std::vector<LineMeta>& lines() { return lines_; }
  const std::vector<LineMeta>& lines() const { return lines_; }

  bool clsf_flag() const { return clsf_flag_; }
  void set_clsf_flag(bool value) { clsf_flag_ = value; }

  std::uint64_t valid_lines() const;
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::uint64_t writebacks() const { return writebacks_; }

  Snapshot snapshot() const;
  // Replaces all line metadata and the flag. Geometry must match.
  void restore(const Snapshot& snap);

 private:
  std::size_t index(std::uint32_t set_index, std::uint32_t way) const {
    return std::size_t{set_index} * geometry_.num_ways + way;
  }
  std::optional<std::uint32_t> find(std::uint32_t set_index, Pid pid, std::uint64_t tag) const;
  void touch(std::uint32_t set_index, std::uint32_t way);

  CacheGeometry geometry_;
  Latencies latencies_;
  std::uint32_t offset_bits_ = 0;
  std::uint32_t index_bits_ = 0;
  std::vector<LineMeta> lines_;
  std::vector<Pid> registered_;  // sorted
  bool clsf_flag_ = false;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t writebacks_ = 0;
};

// CSV dump with columns set,way,owner,tag,coherence,fase.
void write_snapshot_csv(std::ostream& out, const Snapshot& snap);

}  // namespace fase
