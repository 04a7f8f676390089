#pragma once

#include <string>
#include <vector>

#include "fcsim/loop.hpp"

namespace fcsim {

/// CSV rendering of a trace, one row per step, doubles printed with enough
/// digits to round-trip exactly. Identical traces render to identical bytes.
std::string trace_to_csv(const std::vector<TraceRecord>& trace);

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);

/// Inverse of trace_to_csv; throws on malformed headers or rows.
std::vector<TraceRecord> parse_trace_csv(const std::string& text);

std::vector<TraceRecord> read_trace_csv(const std::string& path);

}  // namespace fcsim
