#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plane_sample/rng.hpp"
#include "plane_sample/scenario_space.hpp"

namespace ps {

// Quadrature grid over a positive axis. Weights follow composite Simpson on
// the log axis (where the points are uniform), with the first weight extended
// by `points.front()` so the rectangle down to 0 is covered: the half-normal
// integrands used here have their mode at 0 and would otherwise lose the mass
// below the first grid point.
struct Grid {
    std::vector<double> points;
    std::vector<double> weights;

    static Grid log_spaced(double min, double max, std::size_t n);
    void validate() const;  // strictly increasing positive points, positive weights
    std::size_t size() const { return points.size(); }
};

// Three-level generative model for event counts:
//   X_i    ~ Poisson(b_p)         per scenario, p = hyperplane of i
//   b_p    ~ HalfNormal(sigma)    per hyperplane
//   sigma  ~ HalfNormal(hyperprior_scale)
// All inference is carried out on the discretization grids below.
struct HierModel {
    double hyperprior_scale = 5.0;
    Grid sigma_grid;
    Grid rate_grid;
    std::uint32_t count_cap = 50;  // prior-predictive draws are clamped here

    static HierModel defaults();
    void validate() const;

    static HierModel from_json_file(const std::string& path);
    static HierModel from_json_text(const std::string& text);
    std::string to_json_text() const;
};

// log pdf of |N(0, scale^2)| at x. Domain error if x <= 0 or scale <= 0.
double halfnormal_logpdf(double x, double scale);

// log pmf of Poisson(rate) at k. Domain error if rate <= 0.
double poisson_logpmf(std::uint64_t k, double rate);

// log of the marginal likelihood of one hyperplane's counts at a fixed sigma:
//   log \int HalfNormal(b; sigma) * prod_i Poisson(x_i; b) db
// evaluated by quadrature on model.rate_grid. Returns 0 for empty counts.
double group_log_marginal(std::span<const std::uint32_t> counts, double sigma,
                          const HierModel& model);

// Sum of group_log_marginal over hyperplane groups (groups are independent
// given sigma). Levels with no observations contribute 0.
double log_likelihood_sigma(const GroupedCounts& grouped, double sigma, const HierModel& model);

struct PriorPredictiveDraw {
    double sigma = 0.0;
    std::vector<double> rates;           // one per hyperplane level, schema level order
    std::vector<std::uint32_t> counts;   // one per scenario, space order, clamped at count_cap
};

// Draws sigma, every hyperplane rate and every scenario count from the model.
// Draw order is fixed (sigma, rates in level order, counts in space order) so
// a seeded rng reproduces the draw bit-identically.
PriorPredictiveDraw prior_predictive_sample(const HierModel& model, const ScenarioSpace& space,
                                            Rng& rng);

}  // namespace ps
