#ifndef HLORA_CONFIG_HPP
#define HLORA_CONFIG_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hlora/federation.hpp"

namespace hlora {
namespace cli {

struct ExperimentConfig {
  federation::ExperimentSettings settings;
  int layers = 2;
  std::filesystem::path output = "results.csv";
};

using Overrides = std::map<std::string, std::string>;

/// Every key the config format accepts, in documentation order.
const std::vector<std::string>& known_keys();

/// Parses flat `key = value` text; `#` starts a comment. Overrides win over
/// file values. Throws ConfigError naming the field on any problem.
ExperimentConfig parse_config_text(const std::string& text, const Overrides& overrides = {},
                                   const std::string& origin = "<config>");
ExperimentConfig parse_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Canonical `key = value` rendering; parsing it back gives the same config.
std::string render_config(const ExperimentConfig& config);

}  // namespace cli
}  // namespace hlora

#endif  // HLORA_CONFIG_HPP
