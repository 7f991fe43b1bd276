#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ratt/engine/run_trace.hpp"

namespace ratt {

inline constexpr int kTraceSchemaVersion = 1;

/// A persisted run: the trace plus the effective application config it was
/// produced under.
struct TraceFile {
  int schema_version = kTraceSchemaVersion;
  RunTrace trace{ThoughtTree::create({"-", TaskKind::freeform})};
  nlohmann::json app_config = nlohmann::json::object();
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const BaselineConfig& config);
BaselineConfig baseline_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const MethodConfig& config);
MethodConfig method_config_from_json(const nlohmann::json& doc);

/// Everything except timing (wall time, per-call latency).
nlohmann::json trace_to_json(const RunTrace& trace, const nlohmann::json& app_config);
/// Throws schema on missing fields, wrong types or an invalid tree.
TraceFile trace_from_json(const nlohmann::json& doc);

/// Timing that is kept out of the trace so traces stay byte-identical
/// across reruns.
nlohmann::json timing_json(const RunTrace& trace);
std::string timing_path(const std::string& trace_path);

/// Writes the trace and its timing sidecar ("<path>.timing.json").
void save_trace(const std::string& path, const RunTrace& trace, const nlohmann::json& app_config);
/// Throws schema on unparsable or invalid content, io on unreadable files.
TraceFile load_trace(const std::string& path);

}  // namespace ratt
