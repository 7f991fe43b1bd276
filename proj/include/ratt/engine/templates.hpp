#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ratt/core/thought_tree.hpp"

namespace ratt {

/// Versioned prompt-template set. The default set ships as
/// assets/prompt_templates.json and is compiled into the library.
struct PromptTemplates {
  std::string version;
  std::string system;
  std::vector<std::string> strategies;
  std::map<std::string, std::string> format_hints;  // keyed by task kind name
  std::map<std::string, std::string> templates;

  static const PromptTemplates& builtin();
  static PromptTemplates from_json(const nlohmann::json& doc);
  static PromptTemplates load(const std::string& path);
  nlohmann::json to_json() const;

  /// Substitutes {name} placeholders from `vars` in one left-to-right pass;
  /// substituted text is never rescanned. Unknown placeholders stay as-is.
  /// Throws invalid_config if the template does not exist.
  std::string render(std::string_view name, const std::map<std::string, std::string>& vars) const;

  /// Strategy directive for the given index, cycling through the list.
  const std::string& strategy(std::size_t index) const;
  std::string format_hint(TaskKind kind) const;

  friend bool operator==(const PromptTemplates&, const PromptTemplates&) = default;
};

}  // namespace ratt
