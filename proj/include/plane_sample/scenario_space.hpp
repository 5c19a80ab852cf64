#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ps {

using ScenarioId = std::uint32_t;

struct Feature {
    std::string name;
    std::vector<std::string> levels;  // ordered; order is semantic for ordinal features
};

// Describes the coordinate axes of a scenario space and which axis slices the
// space into hyperplanes (the grouping level of the hierarchical model).
struct FeatureSchema {
    std::vector<Feature> features;
    std::string hyperplane_feature;

    // Index of a feature by name; throws std::invalid_argument if unknown.
    std::size_t feature_index(std::string_view name) const;
    std::size_t hyperplane_index() const { return feature_index(hyperplane_feature); }
    const Feature& hyperplane() const { return features[hyperplane_index()]; }

    // Index of a level within a feature; nullopt if the level is not declared.
    std::optional<std::uint32_t> level_index(std::size_t feature, std::string_view level) const;

    // Enforces: unique feature names, >=1 unique levels each, hyperplane_feature declared.
    void validate() const;
};

struct Scenario {
    ScenarioId id = 0;
    std::vector<std::uint32_t> coords;  // one level index per feature, schema order
};

class ScenarioSpace {
  public:
    ScenarioSpace() = default;

    // Validates the schema, coordinate ranges, id uniqueness and coordinate
    // uniqueness; throws std::invalid_argument on violation.
    ScenarioSpace(FeatureSchema schema, std::vector<Scenario> scenarios);

    const FeatureSchema& schema() const { return schema_; }
    const std::vector<Scenario>& scenarios() const { return scenarios_; }
    std::size_t size() const { return scenarios_.size(); }
    bool empty() const { return scenarios_.empty(); }

    bool contains(ScenarioId id) const;
    const Scenario& scenario_by_id(ScenarioId id) const;  // throws if unknown
    std::size_t index_of(ScenarioId id) const;            // position in scenarios()

    // Hyperplane level index of a scenario.
    std::uint32_t hyperplane_level(ScenarioId id) const;

  private:
    FeatureSchema schema_;
    std::vector<Scenario> scenarios_;
    std::vector<std::pair<ScenarioId, std::uint32_t>> id_index_;  // sorted by id
};

struct Observation {
    ScenarioId scenario_id = 0;
    std::uint32_t count = 0;  // nonnegative event count (collisions, violations, ...)
};

struct HyperplaneGroup {
    std::uint32_t level_index = 0;
    std::string level_name;
    std::vector<ScenarioId> scenario_ids;
};

// Partition of the space keyed by the hyperplane feature's levels, in schema
// level order. Levels with no scenarios are omitted, so an empty space yields
// an empty partition.
std::vector<HyperplaneGroup> partition_by_hyperplane(const ScenarioSpace& space);

// Observation counts grouped by hyperplane level index. Only levels with at
// least one observation appear.
struct GroupedCounts {
    std::vector<std::uint32_t> level_indices;           // parallel to counts
    std::vector<std::vector<std::uint32_t>> counts;     // counts per level
};
GroupedCounts group_counts_by_hyperplane(const std::vector<Observation>& observations,
                                         const ScenarioSpace& space);

}  // namespace ps
