#include "ratt/provider/http_provider.hpp"

#include <algorithm>
#include <regex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace ratt {

using nlohmann::json;

HttpProvider::HttpProvider(ProviderSettings settings)
    : settings_(std::move(settings)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  static const std::regex url_re(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:.]+\])(:([0-9]{1,5}))?(/[^\s?#]*)?$)");
  std::smatch m;
  if (!std::regex_match(settings_.base_url, m, url_re)) {
    throw Error(ErrorKind::provider_unavailable, "malformed provider base URL '" + settings_.base_url + "'");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (m[1] == "https") {
    throw Error(ErrorKind::provider_unavailable, "this build has no TLS support for " + settings_.base_url);
  }
#endif
  origin_ = m[1].str() + "://" + m[2].str() + (m[3].matched ? m[3].str() : "");
  path_prefix_ = m[5].matched ? m[5].str() : "";
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (settings_.retry.max_attempts < 1) settings_.retry.max_attempts = 1;
  set_embed_char_cap(settings_.embed_char_cap);
}

HttpProvider::~HttpProvider() = default;

HttpProvider::Response HttpProvider::post_json(const std::string& endpoint, const std::string& body) {
  httplib::Client client(origin_);
  client.set_connection_timeout(std::chrono::seconds(settings_.timeout_seconds));
  client.set_read_timeout(std::chrono::seconds(settings_.timeout_seconds));
  client.set_write_timeout(std::chrono::seconds(settings_.timeout_seconds));
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);

  const std::string path = path_prefix_ + endpoint;
  std::string last_failure;
  auto backoff = settings_.retry.initial_backoff;
  for (int attempt = 1; attempt <= settings_.retry.max_attempts; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    bool retryable = true;
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      return {res->body, attempt};
    } else {
      last_failure = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
      retryable = res->status == 429 || res->status >= 500;
    }
    if (!retryable || attempt == settings_.retry.max_attempts) break;
    sleeper_(backoff);
    backoff *= 2;
  }
  throw Error(ErrorKind::provider_unavailable, "POST " + origin_ + path + " failed: " + last_failure);
}

Provider::Generated HttpProvider::do_generate(const GenerationRequest& request, std::size_t) {
  json messages = json::array();
  if (!request.system_instruction.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_instruction}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
  const json body = {{"model", settings_.generation_model},
                     {"messages", messages},
                     {"temperature", request.temperature},
                     {"max_tokens", request.max_tokens}};
  const auto res = post_json("/chat/completions", body.dump());
  Generated g;
  g.attempts = res.attempts;
  try {
    const auto doc = json::parse(res.body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    g.text = content.is_null() ? std::string() : content.get<std::string>();
    if (doc.contains("usage")) {
      g.prompt_tokens = doc["usage"].value("prompt_tokens", std::size_t{0});
      g.completion_tokens = doc["usage"].value("completion_tokens", std::size_t{0});
    } else {
      g.prompt_tokens = approximate_tokens(request.user_prompt);
      g.completion_tokens = approximate_tokens(g.text);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::provider_protocol, std::string("bad chat completion response: ") + e.what());
  }
  return g;
}

Provider::Embedded HttpProvider::do_embed(const std::vector<std::string>& texts, std::size_t) {
  const json body = {{"model", settings_.embedding_model}, {"input", texts}};
  const auto res = post_json("/embeddings", body.dump());
  Embedded out;
  out.attempts = res.attempts;
  try {
    const auto doc = json::parse(res.body);
    const auto& data = doc.at("data");
    std::vector<std::pair<std::size_t, EmbeddingVector>> items;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& item = data.at(i);
      const auto values = item.at("embedding").get<std::vector<double>>();
      EmbeddingVector v(static_cast<Eigen::Index>(values.size()));
      for (std::size_t j = 0; j < values.size(); ++j) v(static_cast<Eigen::Index>(j)) = static_cast<float>(values[j]);
      items.emplace_back(item.value("index", i), std::move(v));
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [index, v] : items) out.vectors.push_back(std::move(v));
    if (doc.contains("usage")) out.prompt_tokens = doc["usage"].value("prompt_tokens", std::size_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorKind::provider_protocol, std::string("bad embeddings response: ") + e.what());
  }
  return out;
}

}  // namespace ratt
