#include "ratt/engine/run_config.hpp"

#include <algorithm>
#include <string>

#include "ratt/core/error.hpp"
#include "ratt/engine/run_trace.hpp"

namespace ratt {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::io: return "io";
    case Method::cot: return "cot";
    case Method::cot_sc: return "cot_sc";
    case Method::tot: return "tot";
    case Method::rat: return "rat";
    case Method::ratt: return "ratt";
  }
  return "ratt";
}

Method method_from_string(std::string_view name) {
  for (auto m : {Method::io, Method::cot, Method::cot_sc, Method::tot, Method::rat, Method::ratt}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::invalid_input, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(QueryMode mode) {
  return mode == QueryMode::embed_concat_text ? "embed_concat_text" : "average_vectors";
}

QueryMode query_mode_from_string(std::string_view name) {
  if (name == "embed_concat_text") return QueryMode::embed_concat_text;
  if (name == "average_vectors") return QueryMode::average_vectors;
  throw Error(ErrorKind::invalid_input, "unknown query mode '" + std::string(name) + "'");
}

double Temperatures::for_tag(CallTag tag) const {
  switch (tag) {
    case CallTag::strategy_gen: return strategy_gen;
    case CallTag::lookahead: return lookahead;
    case CallTag::correction: return correction;
    case CallTag::integration: return integration;
    case CallTag::final: return final;
    case CallTag::baseline: return baseline;
  }
  return baseline;
}

void RunConfig::validate() const {
  if (m < 1) throw Error(ErrorKind::invalid_config, "m must be at least 1");
  if (T < 1) throw Error(ErrorKind::invalid_config, "T must be at least 1");
  if (max_tokens <= 0) throw Error(ErrorKind::invalid_config, "max_tokens must be positive");
  if (band_policy) band_policy->validate();
  for (double t : {temperatures.strategy_gen, temperatures.lookahead, temperatures.correction,
                   temperatures.integration, temperatures.final, temperatures.baseline,
                   temperatures.sampling}) {
    if (!(t >= 0.0)) throw Error(ErrorKind::invalid_config, "temperatures must be >= 0");
  }
}

BandPolicy RunConfig::effective_band_policy() const {
  return band_policy ? *band_policy : BandPolicy::for_iterations(T);
}

void BaselineConfig::validate() const {
  if (n_sc < 1) throw Error(ErrorKind::invalid_config, "n_sc must be at least 1");
  if (tot_b < 1) throw Error(ErrorKind::invalid_config, "ToT breadth must be at least 1");
  if (tot_d < 1) throw Error(ErrorKind::invalid_config, "ToT depth must be at least 1");
  if (rat_steps < 1) throw Error(ErrorKind::invalid_config, "RAT steps must be at least 1");
}

std::string RunError::strip(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.kind())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

LibrarySnapshot LibrarySnapshot::capture(const Library& library,
                                         const std::vector<RetrievalRecord>& retrievals) {
  LibrarySnapshot s;
  s.embedder_id = library.embedder_id();
  s.dimension = library.dimension();
  s.total_chunks = library.size();
  std::vector<std::size_t> keep;
  if (!library.empty()) keep.push_back(0);
  for (const auto& r : retrievals) {
    for (const auto& e : r.entries) keep.push_back(e.position);
  }
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (auto i : keep) s.chunks.push_back(library.chunk(i));
  return s;
}

Library LibrarySnapshot::to_library() const { return Library(embedder_id, dimension, chunks); }

}  // namespace ratt
