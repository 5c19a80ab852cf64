#include "plane_sample/hier_model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "plane_sample/stats.hpp"

namespace ps {

namespace {

using nlohmann::json;

Grid grid_from_json(const json& j, const char* name) {
    if (!j.contains(name)) throw std::invalid_argument(std::string("model config: missing ") + name);
    const json& g = j.at(name);
    const double min = g.at("min").get<double>();
    const double max = g.at("max").get<double>();
    const auto n = g.at("n").get<std::size_t>();
    return Grid::log_spaced(min, max, n);
}

}  // namespace

Grid Grid::log_spaced(double min, double max, std::size_t n) {
    if (!(min > 0.0) || !(max > min)) throw std::invalid_argument("grid: need 0 < min < max");
    if (n < 2) throw std::invalid_argument("grid: need at least 2 points");
    Grid g;
    g.points.resize(n);
    g.weights.assign(n, 0.0);
    const double lmin = std::log(min), lmax = std::log(max);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        g.points[i] = std::exp(lmin + t * (lmax - lmin));
    }
    g.points.front() = min;  // exact endpoints, no exp/log round-trip noise
    g.points.back() = max;
    // \int f(b) db = \int f(e^u) e^u du with u uniform: composite Simpson on
    // the log axis (trapezoid on the final interval when the interval count
    // is odd), then the jacobian folded into the per-point weight. Plain
    // trapezoid here is too coarse: its error on the default 400-point grid
    // sits near 7e-5 and would swamp the 1e-6 normalization budget.
    const double h = (lmax - lmin) / static_cast<double>(n - 1);
    const std::size_t intervals = n - 1;
    for (std::size_t p = 0; p + 1 < intervals; p += 2) {
        g.weights[p] += h / 3.0;
        g.weights[p + 1] += 4.0 * h / 3.0;
        g.weights[p + 2] += h / 3.0;
    }
    if (intervals % 2 == 1) {
        g.weights[n - 2] += h / 2.0;
        g.weights[n - 1] += h / 2.0;
    }
    for (std::size_t i = 0; i < n; ++i) g.weights[i] *= g.points[i];
    g.weights.front() += min;  // rectangle over (0, min]
    g.validate();
    return g;
}

void Grid::validate() const {
    if (points.size() != weights.size()) throw std::invalid_argument("grid: points/weights size mismatch");
    if (points.size() < 2) throw std::invalid_argument("grid: need at least 2 points");
    double prev = 0.0;
    for (double p : points) {
        if (!(p > prev)) throw std::invalid_argument("grid: points must be positive and strictly increasing");
        prev = p;
    }
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("grid: weights must be positive");
    }
}

HierModel HierModel::defaults() {
    HierModel m;
    m.hyperprior_scale = 5.0;
    m.sigma_grid = Grid::log_spaced(0.05, 20.0, 200);
    m.rate_grid = Grid::log_spaced(0.01, 40.0, 400);
    m.count_cap = 50;
    return m;
}

void HierModel::validate() const {
    if (!(hyperprior_scale > 0.0)) throw std::invalid_argument("model: hyperprior_scale must be positive");
    sigma_grid.validate();
    rate_grid.validate();
    if (count_cap == 0) throw std::invalid_argument("model: count_cap must be positive");
}

HierModel HierModel::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open model config");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_text(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

HierModel HierModel::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    HierModel m;
    m.hyperprior_scale = j.at("hyperprior_scale").get<double>();
    m.sigma_grid = grid_from_json(j, "sigma_grid");
    m.rate_grid = grid_from_json(j, "rate_grid");
    m.count_cap = j.at("count_cap").get<std::uint32_t>();
    m.validate();
    return m;
}

std::string HierModel::to_json_text() const {
    json j;
    j["hyperprior_scale"] = hyperprior_scale;
    j["sigma_grid"] = {{"min", sigma_grid.points.front()},
                       {"max", sigma_grid.points.back()},
                       {"n", sigma_grid.size()}};
    j["rate_grid"] = {{"min", rate_grid.points.front()},
                      {"max", rate_grid.points.back()},
                      {"n", rate_grid.size()}};
    j["count_cap"] = count_cap;
    return j.dump(2) + "\n";
}

double halfnormal_logpdf(double x, double scale) {
    if (!(x > 0.0) || !(scale > 0.0)) throw std::domain_error("halfnormal_logpdf: need x > 0, scale > 0");
    static const double log_sqrt_2_over_pi = 0.5 * std::log(2.0 / std::numbers::pi);
    const double z = x / scale;
    return log_sqrt_2_over_pi - std::log(scale) - 0.5 * z * z;
}

double poisson_logpmf(std::uint64_t k, double rate) {
    if (!(rate > 0.0)) throw std::domain_error("poisson_logpmf: need rate > 0");
    return static_cast<double>(k) * std::log(rate) - rate - std::lgamma(static_cast<double>(k) + 1.0);
}

double group_log_marginal(std::span<const std::uint32_t> counts, double sigma,
                          const HierModel& model) {
    if (counts.empty()) return 0.0;
    const Grid& rg = model.rate_grid;
    double sum = 0.0;    // sum of counts
    double lgam = 0.0;   // sum of lgamma(x_i + 1), rate-independent
    for (std::uint32_t x : counts) {
        sum += static_cast<double>(x);
        lgam += std::lgamma(static_cast<double>(x) + 1.0);
    }
    const double m = static_cast<double>(counts.size());
    std::vector<double> terms(rg.size());
    for (std::size_t k = 0; k < rg.size(); ++k) {
        const double b = rg.points[k];
        terms[k] = std::log(rg.weights[k]) + halfnormal_logpdf(b, sigma) + sum * std::log(b) - m * b;
    }
    return stats::log_sum_exp(terms) - lgam;
}

double log_likelihood_sigma(const GroupedCounts& grouped, double sigma, const HierModel& model) {
    double total = 0.0;
    for (const auto& counts : grouped.counts) {
        if (!counts.empty()) total += group_log_marginal(counts, sigma, model);
    }
    return total;
}

PriorPredictiveDraw prior_predictive_sample(const HierModel& model, const ScenarioSpace& space,
                                            Rng& rng) {
    PriorPredictiveDraw draw;
    draw.sigma = halfnormal(rng, model.hyperprior_scale);
    const auto& schema = space.schema();
    const std::size_t n_levels = schema.hyperplane().levels.size();
    draw.rates.resize(n_levels);
    for (std::size_t p = 0; p < n_levels; ++p) draw.rates[p] = halfnormal(rng, draw.sigma);
    const std::size_t hp = schema.hyperplane_index();
    draw.counts.resize(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        const std::size_t level = space.scenarios()[i].coords[hp];
        const std::uint64_t c = poisson(rng, draw.rates[level]);
        draw.counts[i] = static_cast<std::uint32_t>(std::min<std::uint64_t>(c, model.count_cap));
    }
    return draw;
}

}  // namespace ps
