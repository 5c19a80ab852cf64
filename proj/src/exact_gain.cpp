#include "plane_sample/exact_gain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plane_sample/stats.hpp"

namespace ps::exact {

namespace {

std::vector<double> normalize_log(std::vector<double> lp) {
    const double lse = ps::stats::log_sum_exp(lp);
    if (!std::isfinite(lse)) throw std::runtime_error("exact model: degenerate distribution");
    for (double& v : lp) v = std::exp(v - lse);
    return lp;
}

double entropy_of(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

}  // namespace

// Per hyperplane group of the candidate set: every count combination of the
// group's members, with the likelihood vector over sigma and the product of
// per-count pmfs over the rate grid (needed for rate-marginal queries).
struct ExactModel::GroupTables {
    std::uint32_t level = 0;
    std::size_t n_members = 0;
    std::uint64_t n_combos = 1;            // (cap+1)^n_members
    std::vector<double> lik;               // [combo*J + j] = P(x_combo | sigma_j)
    std::vector<double> rate_prod;         // [combo*K + k] = prod_i pmf(x_i | b_k)
};

ExactModel::ExactModel(const HierModel& model, const ScenarioSpace& space) {
    model.validate();
    if (model.count_cap < 1) throw std::invalid_argument("exact model: count_cap must be >= 1");
    cap_ = model.count_cap;
    const auto& schema = space.schema();
    n_levels_ = schema.hyperplane().levels.size();
    const std::size_t hp = schema.hyperplane_index();
    for (const Scenario& sc : space.scenarios()) {
        scenario_level_.push_back(sc.coords[hp]);
        ids_.push_back(sc.id);
    }

    const std::size_t J = model.sigma_grid.size(), K = model.rate_grid.size();
    std::vector<double> lq(J);
    for (std::size_t j = 0; j < J; ++j)
        lq[j] = std::log(model.sigma_grid.weights[j]) +
                halfnormal_logpdf(model.sigma_grid.points[j], model.hyperprior_scale);
    q_ = normalize_log(std::move(lq));
    prior_sigma_entropy_ = entropy_of(q_);

    r_.resize(J * K);
    for (std::size_t j = 0; j < J; ++j) {
        std::vector<double> lr(K);
        for (std::size_t k = 0; k < K; ++k)
            lr[k] = std::log(model.rate_grid.weights[k]) +
                    halfnormal_logpdf(model.rate_grid.points[k], model.sigma_grid.points[j]);
        const auto row = normalize_log(std::move(lr));
        std::copy(row.begin(), row.end(), r_.begin() + j * K);
    }

    // Clamped pmf: the cap bin carries the full upper tail, so each row sums
    // to 1 exactly and the discrete joint is a genuine probability model.
    pmf_.resize(K * (cap_ + 1));
    for (std::size_t k = 0; k < K; ++k) {
        const double b = model.rate_grid.points[k];
        double below = 0.0;
        for (std::uint32_t x = 0; x < cap_; ++x) {
            const double p = std::exp(poisson_logpmf(x, b));
            pmf_[k * (cap_ + 1) + x] = p;
            below += p;
        }
        pmf_[k * (cap_ + 1) + cap_] = std::max(0.0, 1.0 - below);
    }

    std::vector<double> qb(K, 0.0);
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < K; ++k) qb[k] += q_[j] * r_[j * K + k];
    prior_rate_entropy_ = entropy_of(qb);
}

std::vector<ExactModel::GroupTables> ExactModel::build_group_tables(
    std::span<const ScenarioId> candidate_ids) const {
    const std::size_t J = q_.size(), K = r_.size() / J;

    std::vector<std::vector<std::size_t>> members(n_levels_);
    for (ScenarioId id : candidate_ids) {
        const auto it = std::find(ids_.begin(), ids_.end(), id);
        if (it == ids_.end()) throw std::invalid_argument("exact model: unknown scenario id");
        members[scenario_level_[it - ids_.begin()]].push_back(it - ids_.begin());
    }

    std::uint64_t joint = 1;
    std::vector<GroupTables> tables;
    for (std::uint32_t level = 0; level < n_levels_; ++level) {
        if (members[level].empty()) continue;
        GroupTables t;
        t.level = level;
        t.n_members = members[level].size();
        for (std::size_t i = 0; i < t.n_members; ++i) {
            t.n_combos *= cap_ + 1;
            if (t.n_combos > kMaxJointCombos)
                throw std::invalid_argument("exact model: enumeration too large");
        }
        joint *= t.n_combos;
        if (joint > kMaxJointCombos)
            throw std::invalid_argument("exact model: enumeration too large");

        t.rate_prod.assign(t.n_combos * K, 1.0);
        std::vector<std::uint32_t> combo(t.n_members, 0);
        for (std::uint64_t c = 0; c < t.n_combos; ++c) {
            double* prod = &t.rate_prod[c * K];
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t i = 0; i < t.n_members; ++i)
                    prod[k] *= pmf_[k * (cap_ + 1) + combo[i]];
            // odometer over the group's count tuple
            for (std::size_t i = 0; i < t.n_members; ++i) {
                if (++combo[i] <= cap_) break;
                combo[i] = 0;
            }
        }

        t.lik.assign(t.n_combos * J, 0.0);
        for (std::uint64_t c = 0; c < t.n_combos; ++c)
            for (std::size_t j = 0; j < J; ++j) {
                double acc = 0.0;
                const double* prod = &t.rate_prod[c * K];
                const double* rj = &r_[j * K];
                for (std::size_t k = 0; k < K; ++k) acc += rj[k] * prod[k];
                t.lik[c * J + j] = acc;
            }
        tables.push_back(std::move(t));
    }
    return tables;
}

double ExactModel::expected_conditional_entropy(
    std::span<const ScenarioId> candidate_ids) const {
    if (candidate_ids.empty()) return prior_sigma_entropy_;
    const auto tables = build_group_tables(candidate_ids);
    const std::size_t J = q_.size();

    std::uint64_t joint = 1;
    for (const auto& t : tables) joint *= t.n_combos;

    std::vector<std::uint64_t> odo(tables.size(), 0);
    std::vector<double> lj(J);
    double ece = 0.0, total = 0.0;
    for (std::uint64_t c = 0; c < joint; ++c) {
        for (std::size_t j = 0; j < J; ++j) {
            double v = q_[j];
            for (std::size_t g = 0; g < tables.size(); ++g)
                v *= tables[g].lik[odo[g] * J + j];
            lj[j] = v;
        }
        double px = 0.0;
        for (double v : lj) px += v;
        if (px > 0.0) {
            double h = 0.0;
            for (double v : lj)
                if (v > 0.0) h -= (v / px) * std::log(v / px);
            ece += px * h;
            total += px;
        }
        for (std::size_t g = 0; g < tables.size(); ++g) {
            if (++odo[g] < tables[g].n_combos) break;
            odo[g] = 0;
        }
    }
    return ece / total;
}

double ExactModel::information_gain(std::span<const ScenarioId> candidate_ids) const {
    return prior_sigma_entropy_ - expected_conditional_entropy(candidate_ids);
}

double ExactModel::information_gain_hyperplane(
    std::uint32_t level, std::span<const ScenarioId> candidate_ids) const {
    if (level >= n_levels_) throw std::invalid_argument("exact model: level out of range");
    if (candidate_ids.empty()) return 0.0;
    const auto tables = build_group_tables(candidate_ids);
    const std::size_t J = q_.size(), K = r_.size() / J;

    std::uint64_t joint = 1;
    std::size_t level_table = tables.size();  // sentinel: no candidate in `level`
    for (std::size_t g = 0; g < tables.size(); ++g) {
        joint *= tables[g].n_combos;
        if (tables[g].level == level) level_table = g;
    }

    std::vector<std::uint64_t> odo(tables.size(), 0);
    std::vector<double> post(J), qb(K);
    double ece = 0.0, total = 0.0;
    for (std::uint64_t c = 0; c < joint; ++c) {
        double px = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            double v = q_[j];
            for (std::size_t g = 0; g < tables.size(); ++g)
                v *= tables[g].lik[odo[g] * J + j];
            post[j] = v;
            px += v;
        }
        if (px > 0.0) {
            std::fill(qb.begin(), qb.end(), 0.0);
            for (std::size_t j = 0; j < J; ++j) {
                if (post[j] <= 0.0) continue;
                const double pj = post[j] / px;
                const double* rj = &r_[j * K];
                if (level_table == tables.size()) {
                    for (std::size_t k = 0; k < K; ++k) qb[k] += pj * rj[k];
                } else {
                    const auto& t = tables[level_table];
                    const double* prod = &t.rate_prod[odo[level_table] * K];
                    const double norm = t.lik[odo[level_table] * J + j];
                    if (norm <= 0.0) continue;
                    for (std::size_t k = 0; k < K; ++k) qb[k] += pj * rj[k] * prod[k] / norm;
                }
            }
            ece += px * entropy_of(qb);
            total += px;
        }
        for (std::size_t g = 0; g < tables.size(); ++g) {
            if (++odo[g] < tables[g].n_combos) break;
            odo[g] = 0;
        }
    }
    return prior_rate_entropy_ - ece / total;
}

}  // namespace ps::exact
