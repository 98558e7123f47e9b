#pragma once

// Flush mechanisms applied at a flush point: naive (invalidate every valid
// line), line-level selective (keep lines installed or updated since the
// last flush) and cache-level selective (skip the whole event when no
// critical-segment access happened, otherwise line-level selective).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "fase/cache.hpp"

namespace fase {

enum class FlushMode { kNaive, kLlsf, kClsf };

enum class FlushAction { kFlushLine, kNullifyLine, kNoAction };

std::string_view to_string(FlushMode mode);
std::string_view to_string(FlushAction action);

struct CostParams {
  Cycles alpha = 30;  // per dirty line cleaned
  Cycles beta = 1;    // per line traversed

  // alpha must be at least an order of magnitude above beta.
  void validate() const;

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

struct FlushReport {
  std::uint64_t lines_traversed = 0;
  std::uint64_t lines_flushed = 0;
  std::uint64_t lines_nullified = 0;  // valid lines kept by a per-line decision
  std::uint64_t writebacks = 0;
  bool nullified_event = false;
  Cycles cycles = 0;
  // Valid lines immediately before the event, i.e. what a naive flush of the
  // same state would have invalidated.
  std::uint64_t lines_valid_before = 0;

  friend bool operator==(const FlushReport&, const FlushReport&) = default;
};

// A line that a flush invalidated, identified by its owner-tagged block.
struct FlushedBlock {
  Pid owner = 0;
  std::uint64_t tag = 0;
  std::uint32_t set_index = 0;

  friend auto operator<=>(const FlushedBlock&, const FlushedBlock&) = default;
};

FlushAction decide_line_flush(Coherence coherence, bool fase);

// Runs one flush event over the whole cache. When `flushed` is non-null the
// invalidated blocks are appended to it.
FlushReport flush(Cache& cache, FlushMode mode, const CostParams& params,
                  std::vector<FlushedBlock>* flushed = nullptr);

// alpha * writebacks + beta * lines_traversed.
Cycles flush_cost(const FlushReport& report, const CostParams& params);

// One CSV row: event_id,mode,lines_traversed,lines_flushed,writebacks,nullified,cycles
void write_flush_csv_header(std::ostream& out);
void write_flush_csv_row(std::ostream& out, std::uint64_t event_id, FlushMode mode,
                         const FlushReport& report);

}  // namespace fase
