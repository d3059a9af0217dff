#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "swarmgoal/dynamics.hpp"

namespace swarmgoal::harness {

/// Shipped presets: "fig2", "fig3-match", "fig4-local", "fig4-planner".
/// Throws std::invalid_argument for an unknown name.
WorldConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Parses a JSON object. An optional "preset" key selects the base; every
/// other key overrides one field. Unknown keys, wrong types and invalid
/// values raise std::invalid_argument naming the key.
WorldConfig parse_config(std::string_view json_text);
WorldConfig load_config(const std::string& path);

std::string to_json(const WorldConfig& cfg);

/// Sets one field from its textual value, as used by config files and by
/// --set/--axis. Does not validate the whole config.
void set_field(WorldConfig& cfg, std::string_view key, std::string_view value);
void set_numeric_field(WorldConfig& cfg, std::string_view key, double value);

/// Names accepted by set_field.
const std::vector<std::string>& field_names();

}  // namespace swarmgoal::harness
