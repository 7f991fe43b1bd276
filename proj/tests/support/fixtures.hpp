#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ratt/engine/run_config.hpp"
#include "ratt/provider/scripted_provider.hpp"
#include "ratt/retrieval/library.hpp"

namespace ratt::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ratt-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline EmbeddingVector vec(std::initializer_list<float> values) {
  EmbeddingVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (float x : values) v[i++] = x;
  return v;
}

/// Deterministic nonzero vector: a one-hot-ish pattern plus a small ramp.
inline EmbeddingVector pattern_vector(std::size_t dim, std::size_t seed) {
  EmbeddingVector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    v[static_cast<Eigen::Index>(i)] = static_cast<float>(((seed * 7 + i * 3) % 11) + 1) / 11.0f;
  }
  return v;
}

/// Library of `n` chunks ("doc-<i/3>", i%3) with pattern vectors.
inline Library pattern_library(std::size_t n, std::size_t dim) {
  std::vector<DocumentChunk> chunks;
  for (std::size_t i = 0; i < n; ++i) {
    chunks.push_back({"doc-" + std::to_string(i / 3), static_cast<std::uint32_t>(i % 3),
                      "chunk text number " + std::to_string(i), pattern_vector(dim, i)});
  }
  return Library("scripted-embedding", dim, std::move(chunks));
}

/// Script for one RATT run, derived from Algorithm 1 directly: per layer and
/// strategy a strategy_gen call, then a lookahead call when enabled, then a
/// query embedding and a correction call when retrieval is active; after the
/// strategies one integration call; after all layers one final call.
inline ProviderScript ratt_script(std::size_t m, std::size_t T, bool retrieval, bool lookahead,
                                  std::size_t dim, const std::string& answer = "final answer") {
  ProviderScript s;
  for (std::size_t t = 1; t <= T; ++t) {
    for (std::size_t l = 0; l < m; ++l) {
      const std::string tag = "t" + std::to_string(t) + "s" + std::to_string(l);
      s.respond(CallTag::strategy_gen, "thought " + tag);
      if (lookahead) s.respond(CallTag::lookahead, std::to_string((t + l) % 11));
      if (retrieval) {
        s.embedding(pattern_vector(dim, 100 + t * 10 + l));
        s.respond(CallTag::correction, "refined " + tag);
      }
    }
    s.respond(CallTag::integration, "integrated layer " + std::to_string(t));
  }
  s.respond(CallTag::final, answer);
  return s;
}

inline std::size_t ratt_generate_calls(std::size_t m, std::size_t T, bool retrieval, bool lookahead) {
  return T * (m + m * (retrieval ? 1 : 0) + m * (lookahead ? 1 : 0)) + T + 1;
}

inline ProviderScript io_script(const std::string& answer = "42") {
  ProviderScript s;
  s.respond(CallTag::baseline, answer);
  return s;
}

inline std::string steps_text(std::size_t n) {
  std::string out;
  for (std::size_t i = 1; i <= n; ++i) out += "Step " + std::to_string(i) + ": part " + std::to_string(i) + "\n";
  return out;
}

inline ProviderScript cot_script(std::size_t steps = 2, const std::string& answer = "42") {
  ProviderScript s;
  s.respond(CallTag::baseline, steps_text(steps));
  s.respond(CallTag::final, answer);
  return s;
}

inline ProviderScript cot_sc_script(const std::vector<std::string>& answers) {
  ProviderScript s;
  for (const auto& a : answers) {
    s.respond(CallTag::baseline, steps_text(2));
    s.respond(CallTag::final, a);
  }
  return s;
}

/// Layer 1: the root proposes b thoughts, each valued. Later layers: each of
/// the b kept frontier nodes proposes b thoughts, each valued. Then one final.
inline ProviderScript tot_script(std::size_t b, std::size_t d, const std::string& answer = "42") {
  ProviderScript s;
  std::size_t serial = 0;
  for (std::size_t depth = 1; depth <= d; ++depth) {
    const std::size_t parents = depth == 1 ? 1 : b;
    for (std::size_t p = 0; p < parents; ++p) {
      for (std::size_t j = 0; j < b; ++j) {
        s.respond(CallTag::baseline, "proposal " + std::to_string(serial));
        s.respond(CallTag::lookahead, std::to_string((serial * 3) % 11));
        ++serial;
      }
    }
  }
  s.respond(CallTag::final, answer);
  return s;
}

inline std::size_t tot_generate_calls(std::size_t b, std::size_t d) { return 2 * b + 2 * b * b * (d - 1) + 1; }

/// One draft of `steps` steps, then per step a query embedding and a
/// revision, then one final.
inline ProviderScript rat_script(std::size_t steps, bool retrieval, std::size_t dim,
                                 const std::string& answer = "42") {
  ProviderScript s;
  s.respond(CallTag::baseline, steps_text(steps));
  for (std::size_t i = 0; i < steps; ++i) {
    if (retrieval) {
      s.embedding(pattern_vector(dim, 200 + i));
      s.respond(CallTag::correction, "revised step " + std::to_string(i + 1));
    }
  }
  s.respond(CallTag::final, answer);
  return s;
}

}  // namespace ratt::testing
