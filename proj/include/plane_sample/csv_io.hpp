#pragma once

#include <filesystem>
#include <vector>

#include "plane_sample/scenario_space.hpp"

namespace ps {

// scenarios.csv: header `scenario_id,<feature1>,<feature2>,...`, one row per
// scenario, level names as values. Levels must not contain commas. The level
// order of each feature is reconstructed from first appearance in the file,
// so a written space round-trips as long as every level is used by at least
// one scenario (always true for spaces produced by this library).
//
// `hyperplane_feature` selects the grouping axis; if empty, a feature named
// "town" is used when present, otherwise loading fails.
ScenarioSpace load_space(const std::filesystem::path& path,
                         const std::string& hyperplane_feature = "");
void save_space(const ScenarioSpace& space, const std::filesystem::path& path);

// observations.csv: header `scenario_id,count`. Counts must be nonnegative
// and scenario ids must resolve in `space`. Several rows may reference the
// same scenario (repeated runs).
std::vector<Observation> load_observations(const std::filesystem::path& path,
                                           const ScenarioSpace& space);
void save_observations(const std::vector<Observation>& observations,
                       const std::filesystem::path& path);

}  // namespace ps
