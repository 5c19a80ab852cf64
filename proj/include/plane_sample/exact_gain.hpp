#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plane_sample/hier_model.hpp"
#include "plane_sample/scenario_space.hpp"

namespace ps::exact {

// Fully discrete version of the hierarchical model: sigma restricted to its
// grid (prior ∝ weight · half-normal density, normalized), each rate restricted
// to the rate grid (conditional ∝ weight · half-normal, normalized per sigma),
// and counts on {0..count_cap} with the cap absorbing the Poisson tail. Under
// this model information gains are genuine mutual informations and can be
// enumerated exactly, which is what the MC estimator is tested against.
//
// Enumeration cost grows as (count_cap+1)^|A|; construction and queries refuse
// instances above the guards below.
class ExactModel {
  public:
    static constexpr std::uint64_t kMaxJointCombos = 5'000'000;

    ExactModel(const HierModel& model, const ScenarioSpace& space);

    double prior_sigma_entropy() const { return prior_sigma_entropy_; }
    double prior_rate_entropy() const { return prior_rate_entropy_; }

    // E_x[H(sigma | X_A = x)] over the exact joint; exact counterpart of the
    // MC expected_conditional_entropy under this discrete model.
    double expected_conditional_entropy(std::span<const ScenarioId> candidate_ids) const;

    // I(sigma; X_A) in nats.
    double information_gain(std::span<const ScenarioId> candidate_ids) const;

    // I(b_level; X_A) in nats.
    double information_gain_hyperplane(std::uint32_t level,
                                       std::span<const ScenarioId> candidate_ids) const;

  private:
    struct GroupTables;
    std::vector<GroupTables> build_group_tables(std::span<const ScenarioId> candidate_ids) const;

    std::size_t n_levels_ = 0;
    std::uint32_t cap_ = 0;
    std::vector<std::size_t> scenario_level_;
    std::vector<ScenarioId> ids_;            // space order, for index lookup
    std::vector<double> q_;                  // sigma prior mass, size J
    std::vector<double> r_;                  // [j*K+k] rate conditional mass
    std::vector<double> pmf_;                // [k*(cap+1)+x] clamped Poisson pmf
    double prior_sigma_entropy_ = 0.0;
    double prior_rate_entropy_ = 0.0;
};

}  // namespace ps::exact
