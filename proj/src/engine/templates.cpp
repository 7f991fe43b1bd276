#include "ratt/engine/templates.hpp"

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ratt/core/error.hpp"

namespace ratt {

extern const char* const kBuiltinTemplatesJson;

using nlohmann::json;

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates instance = from_json(json::parse(kBuiltinTemplatesJson));
  return instance;
}

PromptTemplates PromptTemplates::from_json(const json& doc) {
  PromptTemplates t;
  try {
    t.version = doc.at("version").get<std::string>();
    t.system = doc.value("system", std::string());
    t.strategies = doc.at("strategies").get<std::vector<std::string>>();
    t.format_hints = doc.value("format_hints", std::map<std::string, std::string>{});
    t.templates = doc.at("templates").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("bad prompt template set: ") + e.what());
  }
  if (t.strategies.empty()) throw Error(ErrorKind::invalid_config, "template set lists no strategies");
  return t;
}

PromptTemplates PromptTemplates::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open template file " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::invalid_config, path + ": " + e.what());
  }
}

json PromptTemplates::to_json() const {
  return {{"version", version},
          {"system", system},
          {"strategies", strategies},
          {"format_hints", format_hints},
          {"templates", templates}};
}

std::string PromptTemplates::render(std::string_view name,
                                    const std::map<std::string, std::string>& vars) const {
  const auto it = templates.find(std::string(name));
  if (it == templates.end()) {
    throw Error(ErrorKind::invalid_config, "template set " + version + " has no template '" +
                                               std::string(name) + "'");
  }
  const std::string& src = it->second;
  std::string out;
  out.reserve(src.size() + 256);
  std::size_t i = 0;
  while (i < src.size()) {
    if (src[i] == '{') {
      std::size_t j = i + 1;
      while (j < src.size() && (std::islower(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      if (j < src.size() && src[j] == '}' && j > i + 1) {
        const auto var = vars.find(src.substr(i + 1, j - i - 1));
        if (var != vars.end()) {
          out += var->second;
          i = j + 1;
          continue;
        }
      }
    }
    out += src[i++];
  }
  return out;
}

const std::string& PromptTemplates::strategy(std::size_t index) const {
  return strategies[index % strategies.size()];
}

std::string PromptTemplates::format_hint(TaskKind kind) const {
  const auto it = format_hints.find(std::string(to_string(kind)));
  return it == format_hints.end() ? std::string() : it->second;
}

}  // namespace ratt
