#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "memroof/experiments.hpp"
#include "memroof/hardware.hpp"
#include "memroof/placement.hpp"
#include "memroof/workload.hpp"

namespace memroof {

// Schema violation with the offending field path, e.g. "levels[2].bandwidth".
struct ConfigError : std::runtime_error {
  ConfigError(std::string path_, const std::string& msg)
      : std::runtime_error(path_.empty() ? msg : path_ + ": " + msg),
        path(std::move(path_)) {}
  std::string path;
};

ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::ordered_json model_to_json(const ModelSpec& m);

Hierarchy hierarchy_from_json(const nlohmann::json& j);
nlohmann::ordered_json hierarchy_to_json(const Hierarchy& h);

PlacementPolicy policy_from_json(const nlohmann::json& j);
nlohmann::ordered_json policy_to_json(const PlacementPolicy& p);

ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::ordered_json experiment_to_json(const ExperimentSpec& s);

// Inline hierarchy shorthand:
//   <ddr>[+<storage>][+chiplet:<bw>[,<lat>[,<cap>]]]
// where <ddr> is lpddr6 | lpddr6-3x | ddr:<bw>,<lat>
// and <storage> is hbs:<bw>,<lat> | ssd-pcie-gen5 | ssd-pcie-gen6.
// Example: lpddr6-3x+hbs:512gbps,10us
Hierarchy parse_hierarchy_shorthand(std::string_view text);

std::string to_string(TpsMode mode);
TpsMode tps_mode_from_string(std::string_view s);

// Custom preset discovery via the MEMROOF_PRESET_DIR environment variable:
// the directory holds *.json documents, each carrying "kind" (model |
// hierarchy | policy | experiment) and "name".
struct CustomPreset {
  std::string kind;
  std::string name;
  std::string path;
};
std::vector<CustomPreset> discover_custom_presets();
std::optional<nlohmann::json> load_custom_preset(std::string_view kind,
                                                 std::string_view name);

nlohmann::json load_json_file(const std::string& path);

}  // namespace memroof
