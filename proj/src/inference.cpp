#include "plane_sample/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "plane_sample/stats.hpp"

namespace ps {

namespace {

// Entropy of the normalized exponential of `lp` in one pass:
// H = log(sum e) - sum(e_j * (lp_j - mx)) / sum(e), e_j = exp(lp_j - mx).
double entropy_of_log_weights(std::span<const double> lp) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : lp) mx = std::max(mx, v);
    if (!std::isfinite(mx)) throw std::runtime_error("posterior: grid cannot explain the data");
    double se = 0.0, dot = 0.0;
    for (double v : lp) {
        const double e = std::exp(v - mx);
        se += e;
        dot += e * (v - mx);
    }
    return std::log(se) - dot / se;
}

std::vector<double> normalize_log_weights(std::span<const double> lp) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : lp) mx = std::max(mx, v);
    if (!std::isfinite(mx)) throw std::runtime_error("posterior: grid cannot explain the data");
    std::vector<double> mass(lp.size());
    double se = 0.0;
    for (std::size_t j = 0; j < lp.size(); ++j) {
        mass[j] = std::exp(lp[j] - mx);
        se += mass[j];
    }
    for (double& m : mass) m /= se;
    return mass;
}

double entropy_of_mass(std::span<const double> mass) {
    double h = 0.0;
    for (double p : mass)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

void validate_mc_options(const McOptions& opts) {
    stats::z_for_confidence(opts.confidence);  // throws outside (0,1)
    if (!(opts.abs_error > 0.0)) throw std::invalid_argument("mc: abs_error must be positive");
    if (opts.max_samples < 1) throw std::invalid_argument("mc: max_samples must be >= 1");
}

}  // namespace

double entropy(const PosteriorGrid& p) { return entropy_of_mass(p.mass); }

struct GainEngine::SampleStats {
    std::vector<std::uint64_t> m;  // counts per hyperplane level
    std::vector<std::uint64_t> s;  // count sums per hyperplane level
};

GainEngine::GainEngine(HierModel model, const ScenarioSpace& space)
    : model_(std::move(model)), space_(std::make_shared<ScenarioSpace>(space)) {
    model_.validate();
    const auto& schema = space_->schema();
    n_levels_ = schema.hyperplane().levels.size();
    const std::size_t hp = schema.hyperplane_index();
    scenario_level_.reserve(space_->size());
    for (const Scenario& sc : space_->scenarios()) scenario_level_.push_back(sc.coords[hp]);

    const Grid& rg = model_.rate_grid;
    const Grid& sg = model_.sigma_grid;
    const std::size_t K = rg.size(), J = sg.size();
    b_ = rg.points;
    log_b_.resize(K);
    for (std::size_t k = 0; k < K; ++k) log_b_[k] = std::log(b_[k]);

    hnb_.resize(J * K);
    hnb_norm_.resize(J);
    log_prior_.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double sigma = sg.points[j];
        for (std::size_t k = 0; k < K; ++k)
            hnb_[j * K + k] = halfnormal_logpdf(b_[k], sigma) + std::log(rg.weights[k]);
        hnb_norm_[j] = stats::log_sum_exp(std::span(hnb_).subspan(j * K, K));
        log_prior_[j] = std::log(sg.weights[j]) + halfnormal_logpdf(sigma, model_.hyperprior_scale);
    }
    prior_entropy_ = entropy_of_log_weights(log_prior_);
}

const std::vector<double>& GainEngine::group_vector(std::uint64_t m, std::uint64_t s) const {
    if (m > 0xFFFFFFFFull || s > 0xFFFFFFFFull)
        throw std::invalid_argument("group statistics exceed cacheable range");
    const std::uint64_t key = (m << 32) | s;
    {
        std::shared_lock lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
    }
    const std::size_t K = b_.size(), J = hnb_norm_.size();
    auto vec = std::make_unique<std::vector<double>>(J);
    std::vector<double> terms(K);
    const double md = static_cast<double>(m), sd = static_cast<double>(s);
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t k = 0; k < K; ++k)
            terms[k] = hnb_[j * K + k] + sd * log_b_[k] - md * b_[k];
        (*vec)[j] = stats::log_sum_exp(terms);
    }
    std::unique_lock lock(cache_mutex_);
    auto [it, inserted] = cache_.try_emplace(key, std::move(vec));
    return *it->second;
}

PosteriorGrid GainEngine::prior() const {
    PosteriorGrid p;
    p.sigma_points = model_.sigma_grid.points;
    p.mass = normalize_log_weights(log_prior_);
    return p;
}

PosteriorGrid GainEngine::posterior_sigma(const GroupedCounts& grouped) const {
    const std::size_t J = log_prior_.size();
    std::vector<double> lp = log_prior_;
    for (std::size_t g = 0; g < grouped.counts.size(); ++g) {
        const auto& counts = grouped.counts[g];
        if (counts.empty()) continue;
        std::uint64_t s = 0;
        for (std::uint32_t c : counts) s += c;
        const auto& v = group_vector(counts.size(), s);
        for (std::size_t j = 0; j < J; ++j) lp[j] += v[j];
    }
    PosteriorGrid p;
    p.sigma_points = model_.sigma_grid.points;
    p.mass = normalize_log_weights(lp);
    return p;
}

double GainEngine::posterior_entropy(const GroupedCounts& grouped) const {
    return entropy(posterior_sigma(grouped));
}

std::vector<double> GainEngine::rate_posterior(std::uint64_t m, std::uint64_t s,
                                               std::size_t sigma_index) const {
    const std::size_t K = b_.size();
    const double md = static_cast<double>(m), sd = static_cast<double>(s);
    std::vector<double> lp(K);
    for (std::size_t k = 0; k < K; ++k)
        lp[k] = hnb_[sigma_index * K + k] + sd * log_b_[k] - md * b_[k];
    return normalize_log_weights(lp);
}

std::vector<double> GainEngine::rate_marginal(const GroupedCounts& grouped,
                                              std::uint32_t level) const {
    if (level >= n_levels_) throw std::invalid_argument("hyperplane level out of range");
    const PosteriorGrid post = posterior_sigma(grouped);
    std::uint64_t m = 0, s = 0;
    for (std::size_t g = 0; g < grouped.level_indices.size(); ++g) {
        if (grouped.level_indices[g] != level) continue;
        m = grouped.counts[g].size();
        for (std::uint32_t c : grouped.counts[g]) s += c;
    }
    const std::size_t K = b_.size(), J = post.mass.size();
    const auto& v = group_vector(m, s);
    const double md = static_cast<double>(m), sd = static_cast<double>(s);
    std::vector<double> q(K, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        const double pj = post.mass[j];
        if (pj <= 0.0) continue;
        for (std::size_t k = 0; k < K; ++k)
            q[k] += pj * std::exp(hnb_[j * K + k] + sd * log_b_[k] - md * b_[k] - v[j]);
    }
    return q;
}

GainEngine::SampleStats GainEngine::draw_restricted(std::span<const std::size_t> indices,
                                                    Rng& rng) const {
    // The full space is always sampled so that every candidate subset sees the
    // same underlying world for a given seed (common random numbers).
    const PriorPredictiveDraw draw = prior_predictive_sample(model_, *space_, rng);
    SampleStats st;
    st.m.assign(n_levels_, 0);
    st.s.assign(n_levels_, 0);
    for (std::size_t idx : indices) {
        const std::size_t level = scenario_level_[idx];
        st.m[level] += 1;
        st.s[level] += draw.counts[idx];
    }
    return st;
}

double GainEngine::sample_sigma_entropy(const SampleStats& stats) const {
    const std::size_t J = log_prior_.size();
    std::vector<double> lp = log_prior_;
    for (std::size_t level = 0; level < n_levels_; ++level) {
        if (stats.m[level] == 0) continue;
        const auto& v = group_vector(stats.m[level], stats.s[level]);
        for (std::size_t j = 0; j < J; ++j) lp[j] += v[j];
    }
    return entropy_of_log_weights(lp);
}

double GainEngine::sample_rate_entropy(const SampleStats& stats, std::uint32_t level) const {
    const std::size_t J = log_prior_.size(), K = b_.size();
    std::vector<double> lp = log_prior_;
    for (std::size_t l = 0; l < n_levels_; ++l) {
        if (stats.m[l] == 0) continue;
        const auto& v = group_vector(stats.m[l], stats.s[l]);
        for (std::size_t j = 0; j < J; ++j) lp[j] += v[j];
    }
    const std::vector<double> post = normalize_log_weights(lp);
    const std::uint64_t m = stats.m[level], s = stats.s[level];
    const auto& v = m == 0 ? hnb_norm_ : group_vector(m, s);
    const double md = static_cast<double>(m), sd = static_cast<double>(s);
    std::vector<double> q(K, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        const double pj = post[j];
        if (pj <= 0.0) continue;
        for (std::size_t k = 0; k < K; ++k)
            q[k] += pj * std::exp(hnb_[j * K + k] + sd * log_b_[k] - md * b_[k] - v[j]);
    }
    return entropy_of_mass(q);
}

GainEstimate GainEngine::run_mc(std::span<const ScenarioId> candidate_ids, const McOptions& opts,
                                std::uint64_t seed, bool rate_objective,
                                std::uint32_t level) const {
    validate_mc_options(opts);
    if (rate_objective && level >= n_levels_)
        throw std::invalid_argument("hyperplane level out of range");

    std::vector<std::size_t> indices;
    indices.reserve(candidate_ids.size());
    for (ScenarioId id : candidate_ids) indices.push_back(space_->index_of(id));
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

    if (indices.empty()) {
        double h = prior_entropy_;
        if (rate_objective) {
            SampleStats empty;
            empty.m.assign(n_levels_, 0);
            empty.s.assign(n_levels_, 0);
            h = sample_rate_entropy(empty, level);
        }
        return GainEstimate{h, 0.0, opts.confidence, 1, false};
    }

    const double z = stats::z_for_confidence(opts.confidence);
    const std::uint64_t batch = std::max<std::uint64_t>(opts.batch, 1);
    std::vector<double> values;
    values.reserve(std::min<std::uint64_t>(opts.max_samples, 1u << 20));
    double mean = 0.0, hw = 0.0;
    while (values.size() < opts.max_samples) {
        const std::uint64_t take =
            std::min<std::uint64_t>(batch, opts.max_samples - values.size());
        for (std::uint64_t i = 0; i < take; ++i) {
            Rng rng(derive_seed(seed, values.size()));
            const SampleStats st = draw_restricted(indices, rng);
            values.push_back(rate_objective ? sample_rate_entropy(st, level)
                                            : sample_sigma_entropy(st));
        }
        const auto mv = stats::mean_variance(values);
        mean = mv.mean;
        hw = values.size() > 1 ? z * std::sqrt(mv.variance / static_cast<double>(values.size()))
                               : 0.0;
        if (hw <= opts.abs_error) break;
    }
    const bool capped = hw > opts.abs_error;
    if (capped && opts.strict)
        throw std::runtime_error("mc estimate hit max_samples before reaching abs_error");
    return GainEstimate{mean, hw, opts.confidence, values.size(), capped};
}

GainEstimate GainEngine::expected_conditional_entropy(std::span<const ScenarioId> candidate_ids,
                                                      const McOptions& opts,
                                                      std::uint64_t seed) const {
    return run_mc(candidate_ids, opts, seed, false, 0);
}

GainEstimate GainEngine::information_gain(std::span<const ScenarioId> candidate_ids,
                                          const McOptions& opts, std::uint64_t seed) const {
    GainEstimate est = run_mc(candidate_ids, opts, seed, false, 0);
    est.mean = prior_entropy_ - est.mean;
    return est;
}

GainEstimate GainEngine::information_gain_hyperplane(std::uint32_t level,
                                                     std::span<const ScenarioId> candidate_ids,
                                                     const McOptions& opts,
                                                     std::uint64_t seed) const {
    if (level >= n_levels_) throw std::invalid_argument("hyperplane level out of range");
    SampleStats empty;
    empty.m.assign(n_levels_, 0);
    empty.s.assign(n_levels_, 0);
    const double h0 = sample_rate_entropy(empty, level);
    GainEstimate est = run_mc(candidate_ids, opts, seed, true, level);
    est.mean = h0 - est.mean;
    return est;
}

PosteriorGrid posterior_sigma(const std::vector<Observation>& observations,
                              const ScenarioSpace& space, const HierModel& model) {
    GainEngine engine(model, space);
    return engine.posterior_sigma(group_counts_by_hyperplane(observations, space));
}

GainEstimate expected_conditional_entropy(std::span<const ScenarioId> candidate_ids,
                                          const ScenarioSpace& space, const HierModel& model,
                                          const McOptions& opts, Rng& rng) {
    GainEngine engine(model, space);
    return engine.expected_conditional_entropy(candidate_ids, opts, rng());
}

GainEstimate information_gain(std::span<const ScenarioId> candidate_ids,
                              const ScenarioSpace& space, const HierModel& model,
                              const McOptions& opts, Rng& rng) {
    GainEngine engine(model, space);
    return engine.information_gain(candidate_ids, opts, rng());
}

GainEstimate information_gain_hyperplane(std::uint32_t level,
                                         std::span<const ScenarioId> candidate_ids,
                                         const ScenarioSpace& space, const HierModel& model,
                                         const McOptions& opts, Rng& rng) {
    GainEngine engine(model, space);
    return engine.information_gain_hyperplane(level, candidate_ids, opts, rng());
}

}  // namespace ps
