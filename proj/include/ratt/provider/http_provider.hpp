#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "ratt/provider/provider.hpp"

namespace ratt {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

struct ProviderSettings {
  std::string base_url = "https://api.openai.com/v1";
  std::string generation_model = "gpt-3.5-turbo";
  std::string embedding_model = "text-embedding-ada-002";
  std::string api_key;
  RetryPolicy retry;
  std::size_t embed_char_cap = 8000;
  int timeout_seconds = 120;
};

/// OpenAI-compatible client: POST {base_url}/chat/completions and
/// POST {base_url}/embeddings with bearer auth. Transport failures, 429 and
/// 5xx responses are retried with exponential backoff.
class HttpProvider final : public Provider {
 public:
  /// Throws provider_unavailable if base_url cannot be parsed.
  explicit HttpProvider(ProviderSettings settings);
  ~HttpProvider() override;

  std::string generation_model() const override { return settings_.generation_model; }
  std::string embedding_model() const override { return settings_.embedding_model; }

  /// Replaces the sleep used between retries (tests pass a no-op).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
    sleeper_ = std::move(sleeper);
  }

 protected:
  Generated do_generate(const GenerationRequest& request, std::size_t ordinal) override;
  Embedded do_embed(const std::vector<std::string>& texts, std::size_t ordinal) override;

 private:
  struct Response {
    std::string body;
    int attempts = 1;
  };
  Response post_json(const std::string& endpoint, const std::string& body);

  ProviderSettings settings_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. /v1
  std::function<void(std::chrono::milliseconds)> sleeper_;
};

}  // namespace ratt
