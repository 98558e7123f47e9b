#include "fase/flush.hpp"

#include <ostream>
#include <sstream>

#include "fase/errors.hpp"

namespace fase {

std::string_view to_string(FlushMode mode) {
  switch (mode) {
    case FlushMode::kNaive: return "naive";
    case FlushMode::kLlsf: return "llsf";
    case FlushMode::kClsf: return "clsf";
  }
  return "?";
}

std::string_view to_string(FlushAction action) {
  switch (action) {
    case FlushAction::kFlushLine: return "flush";
    case FlushAction::kNullifyLine: return "nullify";
    case FlushAction::kNoAction: return "none";
  }
  return "?";
}

void CostParams::validate() const {
  if (alpha < 10 * beta) {
    std::ostringstream msg;
    msg << "alpha must be an order of magnitude larger than beta (alpha >= 10*beta), got alpha="
        << alpha << " beta=" << beta;
    throw ConfigError(msg.str());
  }
}

FlushAction decide_line_flush(Coherence coherence, bool fase) {
  if (!is_valid(coherence)) return FlushAction::kNoAction;
  return fase ? FlushAction::kNullifyLine : FlushAction::kFlushLine;
}

namespace {

void invalidate(LineMeta& line, std::uint32_t set_index, FlushReport& report,
                std::vector<FlushedBlock>* flushed) {
  if (is_dirty(line.coherence)) ++report.writebacks;
  ++report.lines_flushed;
  if (flushed != nullptr) flushed->push_back({line.owner, line.tag, set_index});
  line.coherence = Coherence::kI;
}

}  // namespace

FlushReport flush(Cache& cache, FlushMode mode, const CostParams& params,
                  std::vector<FlushedBlock>* flushed) {
  FlushReport report;
  report.lines_valid_before = cache.valid_lines();
  const std::uint32_t ways = cache.geometry().num_ways;
  std::vector<LineMeta>& lines = cache.lines();

  if (mode == FlushMode::kClsf && !cache.clsf_flag()) {
    // No critical access since the last flush: skip the event, only the
    // state bits are cleared.
    for (LineMeta& l : lines) l.fase = false;
    report.nullified_event = true;
    cache.set_clsf_flag(false);
    report.cycles = flush_cost(report, params);
    return report;
  }

  // Flush counter walks every line in tag-array order.
  for (std::size_t counter = 0; counter < lines.size(); ++counter) {
    LineMeta& l = lines[counter];
    const auto set_index = static_cast<std::uint32_t>(counter / ways);
    ++report.lines_traversed;
    const FlushAction action = mode == FlushMode::kNaive
                                   ? (l.valid() ? FlushAction::kFlushLine : FlushAction::kNoAction)
                                   : decide_line_flush(l.coherence, l.fase);
    l.fase = false;
    switch (action) {
      case FlushAction::kFlushLine: invalidate(l, set_index, report, flushed); break;
      case FlushAction::kNullifyLine: ++report.lines_nullified; break;
      case FlushAction::kNoAction: break;
    }
  }
  cache.set_clsf_flag(false);
  report.cycles = flush_cost(report, params);
  return report;
}

Cycles flush_cost(const FlushReport& report, const CostParams& params) {
  return params.alpha * report.writebacks + params.beta * report.lines_traversed;
}

void write_flush_csv_header(std::ostream& out) {
  out << "event_id,mode,lines_traversed,lines_flushed,writebacks,nullified,cycles\n";
}

void write_flush_csv_row(std::ostream& out, std::uint64_t event_id, FlushMode mode,
                         const FlushReport& report) {
  out << event_id << ',' << to_string(mode) << ',' << report.lines_traversed << ','
      << report.lines_flushed << ',' << report.writebacks << ','
      << (report.nullified_event ? 1 : 0) << ',' << report.cycles << '\n';
}

}  // namespace fase
