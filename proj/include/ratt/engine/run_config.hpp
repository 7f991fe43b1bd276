#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "ratt/provider/provider.hpp"
#include "ratt/retrieval/band_policy.hpp"

namespace ratt {

enum class Method { io, cot, cot_sc, tot, rat, ratt };

std::string_view to_string(Method method);
/// Throws invalid_input for an unknown name.
Method method_from_string(std::string_view name);

enum class QueryMode { embed_concat_text, average_vectors };

std::string_view to_string(QueryMode mode);
QueryMode query_mode_from_string(std::string_view name);

struct Temperatures {
  double strategy_gen = 0.7;
  double lookahead = 0.0;
  double correction = 0.0;
  double integration = 0.0;
  double final = 0.0;
  double baseline = 0.0;
  // Independent samples (CoT-SC chains, ToT proposals).
  double sampling = 0.7;

  double for_tag(CallTag tag) const;

  friend bool operator==(const Temperatures&, const Temperatures&) = default;
};

struct RunConfig {
  std::size_t m = 3;
  std::size_t T = 3;
  std::size_t k = 3;
  // Unset means the thirds rule for T.
  std::optional<BandPolicy> band_policy;
  bool lookahead_enabled = false;
  QueryMode query_mode = QueryMode::embed_concat_text;
  Temperatures temperatures;
  int max_tokens = 1024;

  /// Throws invalid_config on m = 0, T = 0, max_tokens <= 0 or a bad band policy.
  void validate() const;
  BandPolicy effective_band_policy() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct BaselineConfig {
  std::size_t n_sc = 5;
  std::size_t tot_b = 3;
  std::size_t tot_d = 3;
  std::size_t rat_steps = 4;
  std::size_t rat_k = 3;

  /// Throws invalid_config when any count is zero.
  void validate() const;

  friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

/// Everything needed to re-run any method.
struct MethodConfig {
  Method method = Method::ratt;
  RunConfig engine;
  BaselineConfig baseline;

  friend bool operator==(const MethodConfig&, const MethodConfig&) = default;
};

}  // namespace ratt
