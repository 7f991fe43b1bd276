#include "ratt/app/config.hpp"

#include <fstream>

#include "ratt/app/trace_io.hpp"

namespace ratt {

using nlohmann::json;

void AppConfig::merge_json(const json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorKind::invalid_config, "config must be a JSON object");
    if (doc.contains("provider")) {
      const auto& p = doc.at("provider");
      provider.base_url = p.value("base_url", provider.base_url);
      provider.generation_model = p.value("generation_model", provider.generation_model);
      provider.embedding_model = p.value("embedding_model", provider.embedding_model);
      provider.embed_char_cap = p.value("embed_char_cap", provider.embed_char_cap);
      provider.timeout_seconds = p.value("timeout_seconds", provider.timeout_seconds);
      if (p.contains("retry")) {
        const auto& r = p.at("retry");
        provider.retry.max_attempts = r.value("max_attempts", provider.retry.max_attempts);
        provider.retry.initial_backoff = std::chrono::milliseconds(
            r.value("initial_backoff_ms", static_cast<long long>(provider.retry.initial_backoff.count())));
      }
    }
    if (doc.contains("engine")) {
      json merged = ratt::to_json(engine);
      merged.merge_patch(doc.at("engine"));
      engine = run_config_from_json(merged);
    }
    if (doc.contains("baseline")) {
      json merged = ratt::to_json(baseline);
      merged.merge_patch(doc.at("baseline"));
      baseline = baseline_config_from_json(merged);
    }
    if (doc.contains("paths")) {
      const auto& p = doc.at("paths");
      paths.library = p.value("library", paths.library);
      paths.trace_dir = p.value("trace_dir", paths.trace_dir);
      paths.datasets = p.value("datasets", paths.datasets);
    }
    seed = doc.value("seed", seed);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("config: ") + e.what());
  }
}

void AppConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_config, "cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_config, "config file " + path + ": " + e.what());
  }
  merge_json(doc);
}

void AppConfig::merge_env(const std::function<const char*(const char*)>& getenv) {
  if (const char* key = getenv("RATT_API_KEY"); key && *key) provider.api_key = key;
  if (const char* url = getenv("RATT_BASE_URL"); url && *url) provider.base_url = url;
}

json AppConfig::to_json() const {
  return {{"provider",
           {{"base_url", provider.base_url},
            {"generation_model", provider.generation_model},
            {"embedding_model", provider.embedding_model},
            {"embed_char_cap", provider.embed_char_cap},
            {"timeout_seconds", provider.timeout_seconds},
            {"retry",
             {{"max_attempts", provider.retry.max_attempts},
              {"initial_backoff_ms", provider.retry.initial_backoff.count()}}}}},
          {"engine", ratt::to_json(engine)},
          {"baseline", ratt::to_json(baseline)},
          {"paths", {{"library", paths.library}, {"trace_dir", paths.trace_dir}, {"datasets", paths.datasets}}},
          {"seed", seed}};
}

}  // namespace ratt
