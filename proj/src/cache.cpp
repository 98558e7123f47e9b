#include "fase/cache.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <ostream>
#include <sstream>

#include "fase/errors.hpp"

namespace fase {

namespace {

bool power_of_two(std::uint64_t v) { return v != 0 && std::has_single_bit(v); }

std::uint32_t log2u(std::uint64_t v) { return static_cast<std::uint32_t>(std::countr_zero(v)); }

}  // namespace

void CacheGeometry::validate() const {
  auto check = [](const char* name, std::uint64_t v) {
    if (!power_of_two(v)) {
      std::ostringstream msg;
      msg << name << " must be a power of two >= 1 (got " << v << ")";
      throw ConfigError(msg.str());
    }
  };
  check("sets", num_sets);
  check("ways", num_ways);
  check("block_bytes", block_bytes);
  if (log2u(num_sets) + log2u(block_bytes) >= 64) {
    throw ConfigError("sets * block_bytes does not fit in a 64-bit address");
  }
}

void Latencies::validate() const {
  if (!(miss > 100 && hit < 100)) {
    std::ostringstream msg;
    msg << "latencies must satisfy miss_latency > 100 > hit_latency (got hit=" << hit
        << ", miss=" << miss << ")";
    throw ConfigError(msg.str());
  }
}

char coherence_letter(Coherence c) {
  switch (c) {
    case Coherence::kM: return 'M';
    case Coherence::kE: return 'E';
    case Coherence::kS: return 'S';
    case Coherence::kI: return 'I';
  }
  return '?';
}

std::optional<Coherence> parse_coherence(std::string_view text) {
  if (text.size() != 1) return std::nullopt;
  switch (std::toupper(static_cast<unsigned char>(text[0]))) {
    case 'M': return Coherence::kM;
    case 'E': return Coherence::kE;
    case 'S': return Coherence::kS;
    case 'I': return Coherence::kI;
    default: return std::nullopt;
  }
}

AddrParts decompose(Address address, const CacheGeometry& geometry) {
  const std::uint32_t offset_bits = log2u(geometry.block_bytes);
  const std::uint32_t index_bits = log2u(geometry.num_sets);
  AddrParts parts;
  parts.offset = static_cast<std::uint32_t>(address & (geometry.block_bytes - 1));
  parts.set_index = static_cast<std::uint32_t>((address >> offset_bits) & (geometry.num_sets - 1));
  parts.tag = address >> (offset_bits + index_bits);
  return parts;
}

Address recompose(const AddrParts& parts, const CacheGeometry& geometry) {
  const std::uint32_t offset_bits = log2u(geometry.block_bytes);
  const std::uint32_t index_bits = log2u(geometry.num_sets);
  return (parts.tag << (offset_bits + index_bits)) |
         (Address{parts.set_index} << offset_bits) | parts.offset;
}

Cache::Cache(CacheGeometry geometry, Latencies latencies)
    : geometry_(geometry), latencies_(latencies) {
  geometry_.validate();
  offset_bits_ = log2u(geometry_.block_bytes);
  index_bits_ = log2u(geometry_.num_sets);
  lines_.resize(geometry_.num_lines());
  for (std::uint32_t s = 0; s < geometry_.num_sets; ++s) {
    for (std::uint32_t w = 0; w < geometry_.num_ways; ++w) {
      lines_[index(s, w)].recency = w;
    }
  }
}

void Cache::register_process(Pid pid) {
  auto it = std::lower_bound(registered_.begin(), registered_.end(), pid);
  if (it == registered_.end() || *it != pid) registered_.insert(it, pid);
}

bool Cache::is_registered(Pid pid) const {
  return std::binary_search(registered_.begin(), registered_.end(), pid);
}

std::optional<std::uint32_t> Cache::find(std::uint32_t set_index, Pid pid,
                                         std::uint64_t tag) const {
  for (std::uint32_t w = 0; w < geometry_.num_ways; ++w) {
    const LineMeta& l = lines_[index(set_index, w)];
    if (l.valid() && l.owner == pid && l.tag == tag) return w;
  }
  return std::nullopt;
}

void Cache::touch(std::uint32_t set_index, std::uint32_t way) {
  const std::uint32_t old_rank = lines_[index(set_index, way)].recency;
  for (std::uint32_t w = 0; w < geometry_.num_ways; ++w) {
    LineMeta& l = lines_[index(set_index, w)];
    if (l.recency < old_rank) ++l.recency;
  }
  lines_[index(set_index, way)].recency = 0;
}

std::uint32_t Cache::select_victim_way(std::uint32_t set_index) const {
  std::uint32_t lru_way = 0;
  std::uint32_t lru_rank = 0;
  for (std::uint32_t w = 0; w < geometry_.num_ways; ++w) {
    const LineMeta& l = lines_[index(set_index, w)];
    if (!l.valid()) return w;
    if (l.recency >= lru_rank) {
      lru_rank = l.recency;
      lru_way = w;
    }
  }
  return lru_way;
}

AccessResult Cache::access(Pid pid, AccessOp op, Address address, bool critical) {
  if (!is_registered(pid)) {
    throw ConfigError("access by unregistered pid " + std::to_string(pid));
  }
  const std::uint32_t set_index =
      static_cast<std::uint32_t>((address >> offset_bits_) & (geometry_.num_sets - 1));
  const std::uint64_t tag = address >> (offset_bits_ + index_bits_);

  AccessResult result;
  std::uint32_t way = 0;
  if (auto hit_way = find(set_index, pid, tag)) {
    way = *hit_way;
    LineMeta& l = lines_[index(set_index, way)];
    result.hit = true;
    result.latency = latencies_.hit;
    if (op == AccessOp::kStore && l.coherence != Coherence::kM) {
      l.coherence = Coherence::kM;
      result.coherence_updated = true;
    }
    ++hits_;
  } else {
    way = select_victim_way(set_index);
    LineMeta& l = lines_[index(set_index, way)];
    if (l.valid()) {
      result.evicted = l;
      if (is_dirty(l.coherence)) {
        result.writeback_occurred = true;
        ++writebacks_;
      }
    }
    l.owner = pid;
    l.tag = tag;
    l.coherence = op == AccessOp::kStore ? Coherence::kM : Coherence::kE;
    result.latency = latencies_.miss;
    result.coherence_updated = true;
    ++misses_;
  }

  // The state bit and the critical flag only move together with the
  // coherence bits.
  if (result.coherence_updated) {
    lines_[index(set_index, way)].fase = true;
    if (critical) clsf_flag_ = true;
  }
  touch(set_index, way);
  return result;
}

void Cache::force_state(Pid pid, std::uint32_t set_index, std::uint32_t way, Coherence state) {
  if (set_index >= geometry_.num_sets || way >= geometry_.num_ways) {
    throw ConfigError("force target out of range: set " + std::to_string(set_index) + " way " +
                      std::to_string(way));
  }
  LineMeta& l = lines_[index(set_index, way)];
  if (is_valid(state)) {
    for (std::uint32_t w = 0; w < geometry_.num_ways; ++w) {
      const LineMeta& other = lines_[index(set_index, w)];
      if (w != way && other.valid() && other.owner == pid && other.tag == l.tag) {
        throw ConfigError("force would duplicate a valid line in set " +
                          std::to_string(set_index));
      }
    }
  }
  l.owner = pid;
  l.coherence = state;
  if (!is_valid(state)) l.fase = false;
}

const LineMeta& Cache::line(std::uint32_t set_index, std::uint32_t way) const {
  return lines_.at(index(set_index, way));
}

LineMeta& Cache::line(std::uint32_t set_index, std::uint32_t way) {
  return lines_.at(index(set_index, way));
}

std::uint64_t Cache::valid_lines() const {
  return static_cast<std::uint64_t>(
      std::count_if(lines_.begin(), lines_.end(), [](const LineMeta& l) { return l.valid(); }));
}

Snapshot Cache::snapshot() const { return Snapshot{geometry_, lines_, clsf_flag_}; }

void Cache::restore(const Snapshot& snap) {
  if (!(snap.geometry == geometry_) || snap.lines.size() != lines_.size()) {
    throw ConfigError("snapshot geometry does not match cache");
  }
  lines_ = snap.lines;
  clsf_flag_ = snap.clsf_flag;
}

void write_snapshot_csv(std::ostream& out, const Snapshot& snap) {
  out << "set,way,owner,tag,coherence,fase\n";
  const std::uint32_t ways = snap.geometry.num_ways;
  for (std::size_t i = 0; i < snap.lines.size(); ++i) {
    const LineMeta& l = snap.lines[i];
    out << i / ways << ',' << i % ways << ',' << l.owner << ",0x" << std::hex << l.tag << std::dec
        << ',' << coherence_letter(l.coherence) << ',' << (l.fase ? 1 : 0) << '\n';
  }
}

}  // namespace fase
