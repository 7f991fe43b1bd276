#pragma once

#include <optional>
#include <string>

#include "ratt/app/trace_io.hpp"

namespace ratt {

struct ReplayResult {
  bool match = false;
  // Set when the first difference is inside the call log.
  std::optional<std::size_t> call_index;
  std::string detail;

  /// "MATCH" or "DIVERGENCE at call N: ..." / "DIVERGENCE in <field>: ...".
  std::string report() const;
};

/// Checks the recorded digests, then re-runs the recorded method and config
/// against a strict script built from the trace's own call log and library
/// snapshot, and compares the two traces (timing excluded).
ReplayResult replay_trace(const TraceFile& file);

}  // namespace ratt
