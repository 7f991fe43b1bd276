#include "ratt/provider/provider.hpp"

#include <bit>
#include <cctype>

#include "ratt/core/digest.hpp"

namespace ratt {

std::string_view to_string(CallTag tag) {
  switch (tag) {
    case CallTag::strategy_gen: return "strategy_gen";
    case CallTag::lookahead: return "lookahead";
    case CallTag::correction: return "correction";
    case CallTag::integration: return "integration";
    case CallTag::final: return "final";
    case CallTag::baseline: return "baseline";
  }
  return "baseline";
}

CallTag call_tag_from_string(std::string_view name) {
  if (name == "strategy_gen") return CallTag::strategy_gen;
  if (name == "lookahead") return CallTag::lookahead;
  if (name == "correction") return CallTag::correction;
  if (name == "integration") return CallTag::integration;
  if (name == "final") return CallTag::final;
  if (name == "baseline") return CallTag::baseline;
  throw Error(ErrorKind::schema, "unknown call tag '" + std::string(name) + "'");
}

std::string request_digest(CallTag tag, std::string_view system, std::string_view prompt) {
  std::uint64_t h = fnv1a64(to_string(tag));
  h = fnv1a64(std::string_view("\x1f", 1), h);
  h = fnv1a64(system, h);
  h = fnv1a64(std::string_view("\x1f", 1), h);
  h = fnv1a64(prompt, h);
  return to_hex(h);
}

std::string request_digest(const std::vector<std::string>& inputs) {
  std::uint64_t h = fnv1a64("embed");
  for (const auto& s : inputs) {
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(s, h);
  }
  return to_hex(h);
}

std::string response_digest(std::string_view text) { return digest_hex(text); }

std::string response_digest(const std::vector<EmbeddingVector>& vectors) {
  std::uint64_t h = fnv1a64("vectors");
  for (const auto& v : vectors) {
    h = fnv1a64(std::string_view("\x1e", 1), h);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(v(i));
      char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                       static_cast<char>((bits >> 16) & 0xFF), static_cast<char>(bits >> 24)};
      h = fnv1a64(std::string_view(bytes, 4), h);
    }
  }
  return to_hex(h);
}

std::size_t approximate_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

std::string truncate_utf8(std::string_view text, std::size_t cap) {
  if (text.size() <= cap) return std::string(text);
  std::size_t end = cap;
  while (end > 0 && (static_cast<unsigned char>(text[end]) & 0xC0) == 0x80) --end;
  return std::string(text.substr(0, end));
}

void Provider::append(CallRecord record) {
  std::lock_guard lock(mutex_);
  record.index = log_.size();
  log_.push_back(std::move(record));
}

std::vector<CallRecord> Provider::call_log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t Provider::call_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

std::string Provider::generate(const GenerationRequest& request) {
  if (request.user_prompt.empty()) {
    throw Error(ErrorKind::invalid_input, "generation request has an empty prompt");
  }
  if (request.max_tokens <= 0) throw Error(ErrorKind::invalid_input, "max_tokens must be positive");
  if (request.temperature < 0.0) throw Error(ErrorKind::invalid_input, "temperature must be >= 0");

  std::size_t ordinal = 0;
  {
    std::lock_guard lock(mutex_);
    ordinal = generate_calls_++;
  }
  CallRecord rec;
  rec.kind = CallKind::generate;
  rec.tag = request.call_tag;
  rec.model = generation_model();
  rec.system_instruction = request.system_instruction;
  rec.user_prompt = request.user_prompt;
  rec.temperature = request.temperature;
  rec.max_tokens = request.max_tokens;
  rec.prompt_digest = request_digest(request.call_tag, request.system_instruction, request.user_prompt);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    Generated g = do_generate(request, ordinal);
    rec.response = std::move(g.text);
    rec.prompt_tokens = g.prompt_tokens;
    rec.completion_tokens = g.completion_tokens;
    rec.attempts = g.attempts;
  } catch (const Error& e) {
    rec.error_kind = e.kind();
    rec.error = e.what();
    rec.latency_ms = elapsed();
    append(std::move(rec));
    throw;
  }
  rec.response_digest = response_digest(rec.response);
  rec.latency_ms = elapsed();
  std::string out = rec.response;
  append(std::move(rec));
  return out;
}

std::vector<EmbeddingVector> Provider::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error(ErrorKind::invalid_input, "embed called with no texts");
  std::vector<std::string> inputs;
  inputs.reserve(texts.size());
  for (const auto& t : texts) {
    if (t.empty()) throw Error(ErrorKind::invalid_input, "embed called with an empty text");
    inputs.push_back(truncate_utf8(t, embed_char_cap_));
  }

  std::size_t ordinal = 0;
  {
    std::lock_guard lock(mutex_);
    ordinal = embed_calls_++;
  }
  CallRecord rec;
  rec.kind = CallKind::embed;
  rec.model = embedding_model();
  rec.inputs = inputs;
  rec.prompt_digest = request_digest(inputs);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  auto fail = [&](ErrorKind kind, const std::string& message) {
    Error e(kind, message);
    rec.error_kind = kind;
    rec.error = e.what();
    rec.vectors.clear();
    rec.latency_ms = elapsed();
    append(rec);
    throw e;
  };
  try {
    Embedded e = do_embed(inputs, ordinal);
    rec.vectors = std::move(e.vectors);
    rec.prompt_tokens = e.prompt_tokens;
    rec.attempts = e.attempts;
  } catch (const Error& e) {
    rec.error_kind = e.kind();
    rec.error = e.what();
    rec.latency_ms = elapsed();
    append(std::move(rec));
    throw;
  }
  if (rec.vectors.size() != inputs.size()) {
    fail(ErrorKind::provider_protocol, "embedding batch of " + std::to_string(inputs.size()) +
                                           " texts returned " + std::to_string(rec.vectors.size()) +
                                           " vectors");
  }
  for (const auto& v : rec.vectors) {
    if (v.size() == 0 || v.size() != rec.vectors.front().size()) {
      fail(ErrorKind::provider_protocol, "embedding batch has inconsistent dimensions");
    }
    if (!all_finite(v)) fail(ErrorKind::provider_protocol, "embedding contains non-finite values");
  }
  rec.response_digest = response_digest(rec.vectors);
  rec.latency_ms = elapsed();
  std::vector<EmbeddingVector> out = rec.vectors;
  append(std::move(rec));
  return out;
}

}  // namespace ratt
