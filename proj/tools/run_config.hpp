#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qjm/model.hpp"

namespace qjm::cli {

struct RunConfig {
  ModelSpec spec;
  std::optional<std::filesystem::path> longitudinal;
  std::optional<std::filesystem::path> survival;
  std::filesystem::path out = "qjm-out";
  unsigned jobs = 0;  // 0 = available cores
  bool progress = false;
};

/// "0.1,0.5,0.9", "0.1..0.9" (step 0.1) or "0.05..0.95:0.05".
std::vector<double> parse_tau_list(const std::string& text);

/// Fills `cfg` from a JSON document. Relative data paths are resolved
/// against `base`. Unknown keys are rejected. Throws ConfigError.
void apply_config_json(const nlohmann::json& doc, const std::filesystem::path& base,
                       RunConfig& cfg);

RunConfig load_config_file(const std::filesystem::path& path);

/// Everything that influences the posterior draws, in a stable key order.
/// Output directory and worker count are left out.
nlohmann::ordered_json effective_config(const RunConfig& cfg);

}  // namespace qjm::cli
