#include "ratt/app/replay.hpp"

#include "ratt/baselines/baselines.hpp"
#include "ratt/provider/scripted_provider.hpp"

namespace ratt {

using nlohmann::json;

std::string ReplayResult::report() const {
  if (match) return "MATCH";
  if (call_index) return "DIVERGENCE at call " + std::to_string(*call_index) + ": " + detail;
  return "DIVERGENCE in " + detail;
}

namespace {

std::optional<std::string> digest_problem(const CallRecord& c) {
  if (c.kind == CallKind::generate) {
    if (request_digest(c.tag, c.system_instruction, c.user_prompt) != c.prompt_digest) {
      return "prompt does not match its recorded digest";
    }
    if (!c.error && response_digest(c.response) != c.response_digest) {
      return "response does not match its recorded digest";
    }
  } else {
    if (request_digest(c.inputs) != c.prompt_digest) return "inputs do not match their recorded digest";
    if (!c.error && response_digest(c.vectors) != c.response_digest) {
      return "vectors do not match their recorded digest";
    }
  }
  return std::nullopt;
}

std::string first_key_difference(const json& a, const json& b) {
  if (a.is_object() && b.is_object()) {
    for (const auto& [key, value] : a.items()) {
      if (!b.contains(key)) return key + " missing in replay";
      if (value != b.at(key)) return key + " differs";
    }
    for (const auto& [key, _] : b.items()) {
      if (!a.contains(key)) return key + " only in replay";
    }
  }
  return "value differs";
}

}  // namespace

ReplayResult replay_trace(const TraceFile& file) {
  const RunTrace& original = file.trace;
  for (std::size_t i = 0; i < original.calls.size(); ++i) {
    const auto& c = original.calls[i];
    if (c.index != i) return {false, i, "call index recorded as " + std::to_string(c.index)};
    if (auto problem = digest_problem(c)) return {false, i, *problem};
  }

  ScriptedProvider provider(script_from_call_log(original.calls));
  std::optional<Library> library;
  if (original.library) library = original.library->to_library();

  std::optional<RunTrace> rerun;
  try {
    rerun.emplace(run_method(original.config, original.prompt, library ? &*library : nullptr,
                             provider, original.templates));
  } catch (const RunError& e) {
    if (!e.trace()) return {false, std::nullopt, std::string("run: ") + e.what()};
    rerun.emplace(*e.trace());
  } catch (const Error& e) {
    return {false, std::nullopt, std::string("run: ") + e.what()};
  }
  rerun->seed = original.seed;
  if (rerun->library && original.library) rerun->library->total_chunks = original.library->total_chunks;

  const json a = trace_to_json(original, file.app_config);
  const json b = trace_to_json(*rerun, file.app_config);
  if (a == b) return {true, std::nullopt, {}};

  const auto& ca = a.at("calls");
  const auto& cb = b.at("calls");
  const std::size_t common = std::min(ca.size(), cb.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (ca[i] != cb[i]) return {false, i, first_key_difference(ca[i], cb[i])};
  }
  if (ca.size() != cb.size()) {
    return {false, common,
            ca.size() > cb.size() ? "recorded call missing from replay" : "replay made an extra call"};
  }
  for (const auto& [key, value] : a.items()) {
    if (!b.contains(key) || value != b.at(key)) return {false, std::nullopt, key};
  }
  return {false, std::nullopt, "trace"};
}

}  // namespace ratt
