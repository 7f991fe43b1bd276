#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ratt/engine/run_config.hpp"
#include "ratt/provider/http_provider.hpp"

namespace ratt {

struct AppPaths {
  std::string library;
  std::string trace_dir = "traces";
  std::string datasets;
};

/// Layered settings: built-in defaults, then a JSON config file, then the
/// environment (RATT_API_KEY, RATT_BASE_URL), then command-line flags.
struct AppConfig {
  ProviderSettings provider;
  RunConfig engine;
  BaselineConfig baseline;
  AppPaths paths;
  std::uint64_t seed = 0;

  /// Overlays the fields present in `doc` (same layout as to_json).
  void merge_json(const nlohmann::json& doc);
  /// Throws invalid_config on unreadable or malformed files.
  void merge_file(const std::string& path);
  /// `getenv` is injectable for tests.
  void merge_env(const std::function<const char*(const char*)>& getenv);

  /// The API key is never written out.
  nlohmann::json to_json() const;
};

}  // namespace ratt
