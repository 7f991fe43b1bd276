#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ratt/provider/provider.hpp"

namespace ratt {

struct ScriptedGeneration {
  CallTag tag = CallTag::baseline;
  std::string response;
  // Checked only in strict mode.
  std::optional<std::string> prompt_digest;
  // When set, the call fails with this error instead of answering.
  std::optional<ErrorKind> error_kind;
  std::optional<std::string> error;
};

struct ScriptedEmbedding {
  EmbeddingVector vector;
  std::optional<ErrorKind> error_kind;
  std::optional<std::string> error;
};

/// Two independent queues consumed strictly in order: generations (matched
/// on call tag, and on prompt digest when strict) and embedding vectors (one
/// per embedded text).
struct ProviderScript {
  std::vector<ScriptedGeneration> generations;
  std::vector<ScriptedEmbedding> embeddings;
  bool strict = false;
  std::string generation_model = "scripted";
  std::string embedding_model = "scripted-embedding";

  ProviderScript& respond(CallTag tag, std::string response) {
    generations.push_back({tag, std::move(response), std::nullopt, std::nullopt, std::nullopt});
    return *this;
  }
  ProviderScript& embedding(EmbeddingVector v) {
    embeddings.push_back({std::move(v), std::nullopt, std::nullopt});
    return *this;
  }
};

/// Deterministic provider that replays a ProviderScript.
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(ProviderScript script);

  std::string generation_model() const override { return script_.generation_model; }
  std::string embedding_model() const override { return script_.embedding_model; }

  std::size_t remaining_generations() const { return script_.generations.size() - next_generation_; }
  std::size_t remaining_embeddings() const { return script_.embeddings.size() - next_embedding_; }

 protected:
  Generated do_generate(const GenerationRequest& request, std::size_t ordinal) override;
  Embedded do_embed(const std::vector<std::string>& texts, std::size_t ordinal) override;

 private:
  ProviderScript script_;
  std::size_t next_generation_ = 0;
  std::size_t next_embedding_ = 0;
};

/// Script file: either a JSON array of entries or an object
/// {"strict": bool, "generation_model": str, "embedding_model": str, "entries": [...]}.
/// Entries are {"call_tag": tag, "response": text} or {"embedding": [floats]};
/// either kind may carry "error" (and "error_kind") instead of a payload.
ProviderScript parse_script(const nlohmann::json& doc);
ProviderScript load_script(const std::string& path);
nlohmann::json script_to_json(const ProviderScript& script);
void save_script(const ProviderScript& script, const std::string& path);

/// Rebuilds the script that reproduces a recorded call log, in strict mode.
ProviderScript script_from_call_log(const std::vector<CallRecord>& log);

/// Error kind from its printed name ("script-mismatch" etc.).
ErrorKind error_kind_from_string(std::string_view name);

}  // namespace ratt
