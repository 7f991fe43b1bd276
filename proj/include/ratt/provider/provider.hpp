#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratt/core/error.hpp"
#include "ratt/retrieval/embedding.hpp"

namespace ratt {

enum class CallTag { strategy_gen, lookahead, correction, integration, final, baseline };

std::string_view to_string(CallTag tag);
CallTag call_tag_from_string(std::string_view name);

struct GenerationRequest {
  std::string system_instruction;
  std::string user_prompt;
  double temperature = 0.0;
  int max_tokens = 1024;
  CallTag call_tag = CallTag::baseline;
};

enum class CallKind { generate, embed };

/// One entry of a provider's call log. Failed calls are logged too, with
/// `error` set, so that a log fully describes what the run observed.
struct CallRecord {
  std::size_t index = 0;
  CallKind kind = CallKind::generate;
  CallTag tag = CallTag::baseline;  // generate only
  std::string model;

  std::string system_instruction;
  std::string user_prompt;
  double temperature = 0.0;
  int max_tokens = 0;
  std::vector<std::string> inputs;  // embed only, after truncation

  std::string response;
  std::vector<EmbeddingVector> vectors;
  std::optional<ErrorKind> error_kind;
  std::optional<std::string> error;

  int attempts = 1;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::string prompt_digest;
  std::string response_digest;
  double latency_ms = 0.0;  // never persisted with the trace proper
};

/// Digest of what was sent: tag, system instruction and prompt for a
/// generation; the joined input texts for an embedding batch.
std::string request_digest(CallTag tag, std::string_view system, std::string_view prompt);
std::string request_digest(const std::vector<std::string>& inputs);
std::string response_digest(std::string_view text);
std::string response_digest(const std::vector<EmbeddingVector>& vectors);

/// The single boundary to a language model. Public entry points validate
/// requests, time them, and append to the call log; subclasses only supply
/// the transport.
class Provider {
 public:
  virtual ~Provider() = default;
  Provider() = default;
  Provider(const Provider&) = delete;
  Provider& operator=(const Provider&) = delete;

  std::string generate(const GenerationRequest& request);

  /// One vector per input, in input order, all of one dimension.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

  std::vector<CallRecord> call_log() const;
  std::size_t call_count() const;

  virtual std::string generation_model() const = 0;
  virtual std::string embedding_model() const = 0;

  /// Inputs longer than this many bytes are cut (at a UTF-8 boundary) before
  /// they are sent.
  void set_embed_char_cap(std::size_t cap) { embed_char_cap_ = cap; }
  std::size_t embed_char_cap() const { return embed_char_cap_; }

 protected:
  struct Generated {
    std::string text;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    int attempts = 1;
  };
  struct Embedded {
    std::vector<EmbeddingVector> vectors;
    std::size_t prompt_tokens = 0;
    int attempts = 1;
  };

  /// Transport hooks. `ordinal` counts earlier calls of the same kind.
  virtual Generated do_generate(const GenerationRequest& request, std::size_t ordinal) = 0;
  virtual Embedded do_embed(const std::vector<std::string>& texts, std::size_t ordinal) = 0;

 private:
  void append(CallRecord record);

  mutable std::mutex mutex_;
  std::vector<CallRecord> log_;
  std::size_t generate_calls_ = 0;
  std::size_t embed_calls_ = 0;
  std::size_t embed_char_cap_ = 8000;
};

inline std::vector<CallRecord> call_log(const Provider& provider) { return provider.call_log(); }

/// Rough whitespace token count used where the transport reports none.
std::size_t approximate_tokens(std::string_view text);

/// Cuts `text` to at most `cap` bytes without splitting a UTF-8 sequence.
std::string truncate_utf8(std::string_view text, std::size_t cap);

}  // namespace ratt
