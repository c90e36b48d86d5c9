#pragma once

#include "npcac/simulation.hpp"

#include <string>
#include <vector>

namespace npcac {

/// Benchmark experiments. "eg1" and "eg3" identify a linear model
/// (f = g = 1, no h); "eg4-*", "eg5-*" and "eg6-*" use basis dictionaries for g.
std::vector<std::string> preset_names();

/// Throws ConfigError for an unknown name.
SimConfig preset(const std::string& name);

}  // namespace npcac
