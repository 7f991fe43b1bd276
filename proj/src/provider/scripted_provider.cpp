#include "ratt/provider/scripted_provider.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace ratt {

using nlohmann::json;

namespace {

// Error::what() carries a "kind: " prefix; strip it so a replayed failure
// prints exactly the recorded message.
std::string bare_message(ErrorKind kind, const std::string& message) {
  const std::string prefix = std::string(to_string(kind)) + ": ";
  if (message.rfind(prefix, 0) == 0) return message.substr(prefix.size());
  return message;
}

}  // namespace

ErrorKind error_kind_from_string(std::string_view name) {
  for (auto k : {ErrorKind::invalid_input, ErrorKind::invalid_argument, ErrorKind::invalid_config,
                 ErrorKind::invalid_state, ErrorKind::not_found, ErrorKind::structure,
                 ErrorKind::degenerate_vector, ErrorKind::index_corruption,
                 ErrorKind::provider_unavailable, ErrorKind::provider_protocol,
                 ErrorKind::script_mismatch, ErrorKind::schema, ErrorKind::io}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::schema, "unknown error kind '" + std::string(name) + "'");
}

ScriptedProvider::ScriptedProvider(ProviderScript script) : script_(std::move(script)) {}

Provider::Generated ScriptedProvider::do_generate(const GenerationRequest& request,
                                                  std::size_t ordinal) {
  const std::string where = " at generation call index " + std::to_string(ordinal);
  if (next_generation_ >= script_.generations.size()) {
    throw Error(ErrorKind::script_mismatch, "script exhausted" + where);
  }
  const ScriptedGeneration& entry = script_.generations[next_generation_];
  if (entry.tag != request.call_tag) {
    throw Error(ErrorKind::script_mismatch, "expected call tag " + std::string(to_string(entry.tag)) +
                                                " but got " + std::string(to_string(request.call_tag)) +
                                                where);
  }
  if (script_.strict && entry.prompt_digest) {
    const auto digest =
        request_digest(request.call_tag, request.system_instruction, request.user_prompt);
    if (digest != *entry.prompt_digest) {
      throw Error(ErrorKind::script_mismatch, "prompt digest " + digest + " differs from recorded " +
                                                  *entry.prompt_digest + where);
    }
  }
  ++next_generation_;
  if (entry.error) {
    const auto kind = entry.error_kind.value_or(ErrorKind::provider_unavailable);
    throw Error(kind, bare_message(kind, *entry.error));
  }
  Generated g;
  g.text = entry.response;
  g.prompt_tokens = approximate_tokens(request.system_instruction) + approximate_tokens(request.user_prompt);
  g.completion_tokens = approximate_tokens(entry.response);
  return g;
}

Provider::Embedded ScriptedProvider::do_embed(const std::vector<std::string>& texts,
                                              std::size_t ordinal) {
  Embedded e;
  for (const auto& t : texts) {
    if (next_embedding_ >= script_.embeddings.size()) {
      throw Error(ErrorKind::script_mismatch,
                  "embedding script exhausted at embed call index " + std::to_string(ordinal));
    }
    const ScriptedEmbedding& entry = script_.embeddings[next_embedding_++];
    if (entry.error) {
      const auto kind = entry.error_kind.value_or(ErrorKind::provider_unavailable);
      throw Error(kind, bare_message(kind, *entry.error));
    }
    e.vectors.push_back(entry.vector);
    e.prompt_tokens += approximate_tokens(t);
  }
  return e;
}

ProviderScript parse_script(const json& doc) {
  ProviderScript script;
  const json* entries = &doc;
  if (doc.is_object()) {
    script.strict = doc.value("strict", false);
    script.generation_model = doc.value("generation_model", script.generation_model);
    script.embedding_model = doc.value("embedding_model", script.embedding_model);
    entries = &doc.at("entries");
  }
  if (!entries->is_array()) throw Error(ErrorKind::schema, "script entries must be an array");

  std::optional<std::size_t> dim;
  std::size_t i = 0;
  for (const auto& e : *entries) {
    const std::string where = "script entry " + std::to_string(i++);
    try {
      std::optional<ErrorKind> kind;
      std::optional<std::string> error;
      if (e.contains("error")) {
        error = e.at("error").get<std::string>();
        kind = error_kind_from_string(e.value("error_kind", std::string("provider-unavailable")));
      }
      if (e.contains("call_tag")) {
        ScriptedGeneration g;
        g.tag = call_tag_from_string(e.at("call_tag").get<std::string>());
        if (!error) g.response = e.at("response").get<std::string>();
        if (e.contains("prompt_digest")) g.prompt_digest = e.at("prompt_digest").get<std::string>();
        g.error_kind = kind;
        g.error = error;
        script.generations.push_back(std::move(g));
      } else if (e.contains("embedding") || (error && e.value("kind", "") == "embed")) {
        ScriptedEmbedding s;
        if (!error) {
          const auto values = e.at("embedding").get<std::vector<double>>();
          s.vector.resize(static_cast<Eigen::Index>(values.size()));
          for (std::size_t j = 0; j < values.size(); ++j) {
            s.vector(static_cast<Eigen::Index>(j)) = static_cast<float>(values[j]);
          }
          if (dim && *dim != values.size()) {
            throw Error(ErrorKind::schema, where + ": embedding dimension " +
                                               std::to_string(values.size()) + " differs from " +
                                               std::to_string(*dim));
          }
          dim = values.size();
        }
        s.error_kind = kind;
        s.error = error;
        script.embeddings.push_back(std::move(s));
      } else {
        throw Error(ErrorKind::schema, where + ": needs call_tag or embedding");
      }
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::schema, where + ": " + ex.what());
    }
  }
  return script;
}

ProviderScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open script " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, path + ": " + e.what());
  }
  return parse_script(doc);
}

json script_to_json(const ProviderScript& script) {
  json entries = json::array();
  for (const auto& g : script.generations) {
    json e = {{"call_tag", to_string(g.tag)}};
    if (g.error) {
      e["error"] = *g.error;
      e["error_kind"] = to_string(g.error_kind.value_or(ErrorKind::provider_unavailable));
    } else {
      e["response"] = g.response;
    }
    if (g.prompt_digest) e["prompt_digest"] = *g.prompt_digest;
    entries.push_back(std::move(e));
  }
  for (const auto& s : script.embeddings) {
    if (s.error) {
      entries.push_back({{"kind", "embed"},
                         {"error", *s.error},
                         {"error_kind", to_string(s.error_kind.value_or(ErrorKind::provider_unavailable))}});
    } else {
      entries.push_back({{"embedding", std::vector<float>(s.vector.data(), s.vector.data() + s.vector.size())}});
    }
  }
  return {{"strict", script.strict},
          {"generation_model", script.generation_model},
          {"embedding_model", script.embedding_model},
          {"entries", std::move(entries)}};
}

void save_script(const ProviderScript& script, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write script " + path);
  out << script_to_json(script).dump(2) << '\n';
}

ProviderScript script_from_call_log(const std::vector<CallRecord>& log) {
  ProviderScript script;
  script.strict = true;
  bool saw_generate = false;
  bool saw_embed = false;
  for (const auto& rec : log) {
    if (rec.kind == CallKind::generate) {
      if (!saw_generate) script.generation_model = rec.model;
      saw_generate = true;
      ScriptedGeneration g;
      g.tag = rec.tag;
      g.response = rec.response;
      g.prompt_digest = rec.prompt_digest;
      g.error_kind = rec.error_kind;
      g.error = rec.error;
      script.generations.push_back(std::move(g));
    } else {
      if (!saw_embed) script.embedding_model = rec.model;
      saw_embed = true;
      if (rec.error) {
        script.embeddings.push_back({EmbeddingVector{}, rec.error_kind, rec.error});
        continue;
      }
      for (const auto& v : rec.vectors) script.embeddings.push_back({v, std::nullopt, std::nullopt});
    }
  }
  return script;
}

}  // namespace ratt
