#pragma once

// JSON configuration shared by the command-line tools.  The schema is flat
// and explicit; unknown keys are rejected by name so typos cannot silently
// fall back to defaults.  Every field is optional and defaults to the
// simulator's built-in values.
//
// {
//   "device":    { "r_on": 10000.0, "r_off": 1000000.0, "v_set_th": 1.0,
//                  "v_reset_th": -1.0, "k_set": 1e7, "k_reset": 1e7,
//                  "alpha_set": 1.0, "alpha_reset": 1.0,
//                  "reset_rate_floor": 1e5 },
//   "variation": { "d2d_enabled": true, "c2c_enabled": true,
//                  "d2d_sigma_r": 0.1, "d2d_sigma_th": 0.02,
//                  "c2c_sigma_th": 0.002, "c2c_sigma_rate": 0.03 },
//   "selector_r": 1000.0,
//   "levels": 6
// }

#include <string>

#include "rxbar/device.hpp"

namespace rxbar {

struct ToolConfig {
    DeviceParams device;
    VariationSpec variation;
    double selector_r = 1e3;
    int levels = 6; // ladder size for the multi-level commands

    void validate() const;
};

/// Parse a config from JSON text.  Missing keys keep their defaults; unknown
/// keys throw Error(parse) naming the key; invalid values throw
/// Error(config) naming the field.
[[nodiscard]] ToolConfig parse_config(const std::string& json_text);

/// Read and parse a config file.  Throws Error(io) when unreadable.
[[nodiscard]] ToolConfig load_config(const std::string& path);

/// Canonical JSON rendering (sorted keys, full precision).
[[nodiscard]] std::string dump_config(const ToolConfig& cfg);

/// The calibrated level ladder for this config's nominal device.
[[nodiscard]] LevelConfig make_ladder(const ToolConfig& cfg, int n_levels);

} // namespace rxbar
