#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "plane_sample/hier_model.hpp"
#include "plane_sample/rng.hpp"
#include "plane_sample/scenario_space.hpp"

namespace ps {

// Discrete posterior (or prior) mass over the model's sigma grid.
struct PosteriorGrid {
    std::vector<double> sigma_points;
    std::vector<double> mass;  // >= 0, sums to 1 within 1e-10
};

// Shannon entropy of the mass vector in nats, 0·log0 := 0.
double entropy(const PosteriorGrid& p);

// Monte-Carlo estimate of an information quantity in nats.
struct GainEstimate {
    double mean = 0.0;
    double ci_halfwidth = 0.0;
    double confidence = 0.9;
    std::uint64_t n_samples = 1;
    bool capped = false;  // hit max_samples before reaching abs_error
};

struct McOptions {
    double confidence = 0.90;
    double abs_error = 0.1;          // target CI half-width, nats
    std::uint64_t max_samples = 2000;
    std::uint64_t batch = 50;
    bool strict = false;             // throw instead of returning a capped estimate
};

// Precomputed quadrature tables for one (model, space) pair plus a cache of
// per-group likelihood vectors keyed by the sufficient statistic (m = number
// of counts in the group, S = their sum); the per-count lgamma terms cancel
// under normalization, so (m, S) fully determines the posterior over sigma.
// Immutable after construction apart from the internal cache; safe to share
// across threads.
class GainEngine {
  public:
    GainEngine(HierModel model, const ScenarioSpace& space);

    const HierModel& model() const { return model_; }
    const ScenarioSpace& space() const { return *space_; }

    PosteriorGrid prior() const;
    double prior_entropy() const { return prior_entropy_; }

    PosteriorGrid posterior_sigma(const GroupedCounts& grouped) const;

    // Entropy of the posterior without materializing the PosteriorGrid.
    double posterior_entropy(const GroupedCounts& grouped) const;

    // Normalized posterior over rate_grid for hyperplane `level`, conditional
    // on sigma = sigma_grid[sigma_index], given that level's (m, S).
    std::vector<double> rate_posterior(std::uint64_t m, std::uint64_t s,
                                       std::size_t sigma_index) const;

    // Marginal posterior over rate_grid for hyperplane `level` under the full
    // grouped data (mixes rate_posterior over the sigma posterior).
    std::vector<double> rate_marginal(const GroupedCounts& grouped, std::uint32_t level) const;

    // E[H(sigma | X_A)] where X_A is drawn from the prior predictive restricted
    // to candidate_ids. Empty set returns the prior entropy exactly (hw 0, n 1).
    // Per-sample seeds derive from `seed`, so the estimate is independent of
    // evaluation order and worker count.
    GainEstimate expected_conditional_entropy(std::span<const ScenarioId> candidate_ids,
                                              const McOptions& opts, std::uint64_t seed) const;

    // I(sigma; X_A) = H(sigma) - E[H(sigma|X_A)]; CI carried over unchanged.
    GainEstimate information_gain(std::span<const ScenarioId> candidate_ids,
                                  const McOptions& opts, std::uint64_t seed) const;

    // Same scheme for I(b_level; X_A) with the inner entropy over rate_grid.
    GainEstimate information_gain_hyperplane(std::uint32_t level,
                                             std::span<const ScenarioId> candidate_ids,
                                             const McOptions& opts, std::uint64_t seed) const;

  private:
    struct SampleStats;  // per-draw (m, S) per hyperplane level

    // log-likelihood vector over the sigma grid for one group's (m, S),
    // including the quadrature weight but not the lgamma constant.
    const std::vector<double>& group_vector(std::uint64_t m, std::uint64_t s) const;

    SampleStats draw_restricted(std::span<const std::size_t> indices, Rng& rng) const;
    double sample_sigma_entropy(const SampleStats& stats) const;
    double sample_rate_entropy(const SampleStats& stats, std::uint32_t level) const;

    GainEstimate run_mc(std::span<const ScenarioId> candidate_ids, const McOptions& opts,
                        std::uint64_t seed, bool rate_objective, std::uint32_t level) const;

    HierModel model_;
    std::shared_ptr<const ScenarioSpace> space_;
    std::vector<std::size_t> scenario_level_;    // scenario index -> hyperplane level
    std::size_t n_levels_ = 0;
    std::vector<double> log_b_, b_, log_prior_;  // log_prior_ over sigma grid, unnormalized
    std::vector<double> hnb_;                    // [j*K+k] = halfnormal_logpdf(b_k, sigma_j) + log w_k
    std::vector<double> hnb_norm_;               // per-j log-sum over k of hnb_
    double prior_entropy_ = 0.0;

    mutable std::unordered_map<std::uint64_t, std::unique_ptr<std::vector<double>>> cache_;
    mutable std::shared_mutex cache_mutex_;
};

// Convenience wrappers matching the one-shot call shape; each constructs a
// GainEngine, so hot loops should hold an engine instead.
PosteriorGrid posterior_sigma(const std::vector<Observation>& observations,
                              const ScenarioSpace& space, const HierModel& model);
GainEstimate expected_conditional_entropy(std::span<const ScenarioId> candidate_ids,
                                          const ScenarioSpace& space, const HierModel& model,
                                          const McOptions& opts, Rng& rng);
GainEstimate information_gain(std::span<const ScenarioId> candidate_ids,
                              const ScenarioSpace& space, const HierModel& model,
                              const McOptions& opts, Rng& rng);
GainEstimate information_gain_hyperplane(std::uint32_t level,
                                         std::span<const ScenarioId> candidate_ids,
                                         const ScenarioSpace& space, const HierModel& model,
                                         const McOptions& opts, Rng& rng);

}  // namespace ps
