#pragma once

/**
 * @file config.hpp
 * @brief JSON experiment documents.
 *
 * A document has the sections "plant", "model", "rls", "mpc", "sim",
 * "command" and "output". Basis dictionaries are written as
 *
 *   {"family": "polynomial", "degree": 1}
 *   {"family": "fourier", "harmonics": 2, "half_period": 6}
 *   {"family": "spline", "interior_nodes": 2, "lo": -6, "hi": 6}
 *   {"family": "constant" | "zero" | "atan" | "sin"}
 *
 * and plant coefficients as {"type": "linear", "c": ...},
 * {"type": "atan_affine", "c0": ..., "c1": ...} or
 * {"type": "sin_affine", "c0": ..., "c1": ...}.
 */

#include "npcac/simulation.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace npcac {

inline constexpr const char* kConfigSchema = "npcac.config.v1";

struct GridSpec {
  double lo = -6.0;
  double hi = 6.0;
  int points = 241;
};

struct OutputConfig {
  long snapshot_step = 450;  // step whose estimate is tabulated over the grid
  GridSpec grid;
  long theta_every = 0;      // theta snapshot cadence; 0 = off
  std::vector<Window> windows{{1, 100}, {301, 500}};
};

struct ConfigDocument {
  SimConfig sim;
  OutputConfig output;
};

/// Throws ConfigError on any schema violation.
ConfigDocument parse_config(const nlohmann::json& doc);
ConfigDocument load_config(const std::string& path);

nlohmann::json to_json(const ConfigDocument& doc);
nlohmann::json basis_to_json(const BasisSpec& spec);
BasisSpec basis_from_json(const nlohmann::json& j);

/// Preset wrapped with the default output section.
ConfigDocument preset_document(const std::string& name);

}  // namespace npcac
