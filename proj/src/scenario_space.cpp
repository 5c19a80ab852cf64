#include "plane_sample/scenario_space.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace ps {

std::size_t FeatureSchema::feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].name == name) return i;
    throw std::invalid_argument("unknown feature: " + std::string(name));
}

std::optional<std::uint32_t> FeatureSchema::level_index(std::size_t feature,
                                                        std::string_view level) const {
    const auto& levels = features.at(feature).levels;
    for (std::uint32_t i = 0; i < levels.size(); ++i)
        if (levels[i] == level) return i;
    return std::nullopt;
}

void FeatureSchema::validate() const {
    if (features.empty()) throw std::invalid_argument("schema has no features");
    std::unordered_set<std::string> names;
    for (const auto& f : features) {
        if (!names.insert(f.name).second)
            throw std::invalid_argument("duplicate feature name: " + f.name);
        if (f.levels.empty())
            throw std::invalid_argument("feature '" + f.name + "' has no levels");
        std::unordered_set<std::string> lvls;
        for (const auto& l : f.levels)
            if (!lvls.insert(l).second)
                throw std::invalid_argument("feature '" + f.name + "' has duplicate level '" + l + "'");
    }
    feature_index(hyperplane_feature);  // must be declared
}

ScenarioSpace::ScenarioSpace(FeatureSchema schema, std::vector<Scenario> scenarios)
    : schema_(std::move(schema)), scenarios_(std::move(scenarios)) {
    schema_.validate();

    std::set<std::vector<std::uint32_t>> seen_coords;
    id_index_.reserve(scenarios_.size());
    for (std::uint32_t idx = 0; idx < scenarios_.size(); ++idx) {
        const Scenario& s = scenarios_[idx];
        if (s.coords.size() != schema_.features.size())
            throw std::invalid_argument("scenario " + std::to_string(s.id) +
                                        ": coordinate count does not match schema");
        for (std::size_t f = 0; f < s.coords.size(); ++f)
            if (s.coords[f] >= schema_.features[f].levels.size())
                throw std::invalid_argument("scenario " + std::to_string(s.id) +
                                            ": level index out of range for feature '" +
                                            schema_.features[f].name + "'");
        if (!seen_coords.insert(s.coords).second)
            throw std::invalid_argument("scenario " + std::to_string(s.id) +
                                        ": duplicate coordinates");
        id_index_.emplace_back(s.id, idx);
    }
    std::sort(id_index_.begin(), id_index_.end());
    for (std::size_t i = 1; i < id_index_.size(); ++i)
        if (id_index_[i].first == id_index_[i - 1].first)
            throw std::invalid_argument("duplicate scenario id " +
                                        std::to_string(id_index_[i].first));
}

bool ScenarioSpace::contains(ScenarioId id) const {
    auto it = std::lower_bound(id_index_.begin(), id_index_.end(),
                               std::make_pair(id, std::uint32_t{0}));
    return it != id_index_.end() && it->first == id;
}

std::size_t ScenarioSpace::index_of(ScenarioId id) const {
    auto it = std::lower_bound(id_index_.begin(), id_index_.end(),
                               std::make_pair(id, std::uint32_t{0}));
    if (it == id_index_.end() || it->first != id)
        throw std::invalid_argument("unknown scenario id " + std::to_string(id));
    return it->second;
}

const Scenario& ScenarioSpace::scenario_by_id(ScenarioId id) const {
    return scenarios_[index_of(id)];
}

std::uint32_t ScenarioSpace::hyperplane_level(ScenarioId id) const {
    return scenario_by_id(id).coords[schema_.hyperplane_index()];
}

std::vector<HyperplaneGroup> partition_by_hyperplane(const ScenarioSpace& space) {
    const auto& schema = space.schema();
    const std::size_t hf = schema.hyperplane_index();
    const auto& levels = schema.features[hf].levels;

    std::vector<HyperplaneGroup> groups(levels.size());
    for (std::uint32_t l = 0; l < levels.size(); ++l) {
        groups[l].level_index = l;
        groups[l].level_name = levels[l];
    }
    for (const Scenario& s : space.scenarios())
        groups[s.coords[hf]].scenario_ids.push_back(s.id);

    std::vector<HyperplaneGroup> out;
    for (auto& g : groups)
        if (!g.scenario_ids.empty()) out.push_back(std::move(g));
    return out;
}

GroupedCounts group_counts_by_hyperplane(const std::vector<Observation>& observations,
                                         const ScenarioSpace& space) {
    const std::size_t n_levels = space.schema().hyperplane().levels.size();
    std::vector<std::vector<std::uint32_t>> per_level(n_levels);
    for (const Observation& o : observations)
        per_level[space.hyperplane_level(o.scenario_id)].push_back(o.count);

    GroupedCounts out;
    for (std::uint32_t l = 0; l < n_levels; ++l) {
        if (per_level[l].empty()) continue;
        out.level_indices.push_back(l);
        out.counts.push_back(std::move(per_level[l]));
    }
    return out;
}

}  // namespace ps
