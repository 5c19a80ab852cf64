#include "plane_sample/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "plane_sample/log.hpp"
#include "plane_sample/parallel.hpp"
#include "plane_sample/stats.hpp"

namespace ps {

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::plateau: return "plateau";
        case StopReason::budget: return "budget";
        case StopReason::exhausted: return "exhausted";
    }
    return "unknown";
}

std::vector<ScenarioId> SelectionTrace::selected() const {
    std::vector<ScenarioId> ids;
    ids.reserve(steps.size());
    for (const TraceStep& s : steps) ids.push_back(s.scenario_id);
    return ids;
}

bool stopping_test(const GainEstimate& prev, const GainEstimate& curr, double confidence) {
    const double z = stats::z_for_confidence(confidence);
    const double se_prev = prev.ci_halfwidth / z;
    const double se_curr = curr.ci_halfwidth / z;
    const double lower =
        (curr.mean - prev.mean) - z * std::sqrt(se_prev * se_prev + se_curr * se_curr);
    return lower > 0.0;
}

GainEstimate McGainOracle::evaluate(std::span<const ScenarioId> ids, std::uint64_t seed) const {
    if (objective_.kind == Objective::Kind::hyperplane)
        return engine_.information_gain_hyperplane(objective_.level, ids, opts_, seed);
    return engine_.information_gain(ids, opts_, seed);
}

GainEstimate ExactGainOracle::evaluate(std::span<const ScenarioId> ids, std::uint64_t) const {
    const double g = objective_.kind == Objective::Kind::hyperplane
                         ? model_.information_gain_hyperplane(objective_.level, ids)
                         : model_.information_gain(ids);
    return GainEstimate{g, 0.0, 1.0 - 1e-12, 1, false};
}

SelectionTrace greedy_select(const GainOracle& oracle, const ScenarioSpace& space,
                             const SelectionOptions& opts, Rng& rng) {
    if (space.empty()) throw std::invalid_argument("greedy_select: empty scenario space");
    SelectionTrace trace;
    trace.budget = opts.budget;

    std::vector<ScenarioId> remaining;
    remaining.reserve(space.size());
    for (const Scenario& s : space.scenarios()) remaining.push_back(s.id);
    std::sort(remaining.begin(), remaining.end());

    std::vector<ScenarioId> chosen;
    GainEstimate prev;  // zero gain, zero width: the empty set is exact
    prev.confidence = opts.confidence;

    for (;;) {
        if (opts.budget && chosen.size() >= *opts.budget) {
            trace.stopped_reason = StopReason::budget;
            break;
        }
        if (remaining.empty()) {
            trace.stopped_reason = StopReason::exhausted;
            break;
        }
        const std::uint64_t step_seed = rng();
        std::vector<GainEstimate> results(remaining.size());
        std::vector<ScenarioId> ids(chosen);
        ids.push_back(0);  // slot for the candidate
        parallel_for(remaining.size(), opts.workers, [&](std::size_t i) {
            std::vector<ScenarioId> with = ids;
            with.back() = remaining[i];
            results[i] = oracle.evaluate(with, step_seed);
        });

        std::size_t best = 0;
        for (std::size_t i = 1; i < results.size(); ++i)
            if (results[i].mean > results[best].mean) best = i;

        if (opts.stop_on_plateau && !stopping_test(prev, results[best], opts.confidence)) {
            trace.stopped_reason = StopReason::plateau;
            break;
        }

        TraceStep step;
        step.step = static_cast<std::uint32_t>(chosen.size() + 1);
        step.scenario_id = remaining[best];
        step.gain = results[best];
        step.marginal = results[best].mean - prev.mean;
        trace.steps.push_back(step);
        log::debug("greedy step " + std::to_string(step.step) + ": id " +
                   std::to_string(step.scenario_id) + " gain " + std::to_string(step.gain.mean));

        chosen.push_back(remaining[best]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
        prev = results[best];
    }
    return trace;
}

SelectionTrace greedy_select(const ScenarioSpace& space, const HierModel& model,
                             const Objective& objective, double confidence, double abs_error,
                             Rng& rng, std::optional<std::size_t> budget, std::size_t workers) {
    GainEngine engine(model, space);
    McOptions mc;
    mc.confidence = confidence;
    mc.abs_error = abs_error;
    McGainOracle oracle(engine, mc, objective);
    SelectionOptions opts;
    opts.budget = budget;
    opts.confidence = confidence;
    opts.workers = workers;
    return greedy_select(oracle, space, opts, rng);
}

std::size_t annotate_stop(const SelectionTrace& trace, double confidence) {
    GainEstimate prev;
    prev.confidence = confidence;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        if (!stopping_test(prev, trace.steps[i].gain, confidence)) return i;
        prev = trace.steps[i].gain;
    }
    return trace.steps.size();
}

std::vector<ScenarioId> lhs_select(const ScenarioSpace& space, std::size_t budget, Rng& rng) {
    if (budget > space.size()) throw std::invalid_argument("lhs_select: budget exceeds space");
    std::vector<ScenarioId> out;
    if (budget == 0) return out;
    const auto& features = space.schema().features;
    const std::size_t F = features.size();

    // One random stratum permutation per feature, drawn in schema order.
    std::vector<std::vector<std::size_t>> perm(F);
    for (std::size_t f = 0; f < F; ++f) {
        perm[f].resize(budget);
        for (std::size_t i = 0; i < budget; ++i) perm[f][i] = i;
        for (std::size_t i = budget - 1; i > 0; --i) {
            const std::size_t j = uniform_below(rng, i + 1);
            std::swap(perm[f][i], perm[f][j]);
        }
    }

    std::vector<char> taken(space.size(), 0);
    std::vector<double> tuple(F);
    for (std::size_t s = 0; s < budget; ++s) {
        for (std::size_t f = 0; f < F; ++f) {
            const double u = (static_cast<double>(perm[f][s]) + uniform01(rng)) /
                             static_cast<double>(budget);
            const auto levels = static_cast<double>(features[f].levels.size());
            tuple[f] = std::min(std::floor(u * levels), levels - 1.0);
        }
        std::size_t best = space.size();
        double best_dist = 0.0;
        for (std::size_t i = 0; i < space.size(); ++i) {
            if (taken[i]) continue;
            const Scenario& sc = space.scenarios()[i];
            double d = 0.0;
            for (std::size_t f = 0; f < F; ++f)
                d += std::abs(static_cast<double>(sc.coords[f]) - tuple[f]);
            if (best == space.size() || d < best_dist ||
                (d == best_dist && sc.id < space.scenarios()[best].id)) {
                best = i;
                best_dist = d;
            }
        }
        taken[best] = 1;
        out.push_back(space.scenarios()[best].id);
    }
    return out;
}

std::vector<ScenarioId> random_select(const ScenarioSpace& space, std::size_t budget, Rng& rng) {
    if (budget > space.size()) throw std::invalid_argument("random_select: budget exceeds space");
    std::vector<ScenarioId> ids;
    ids.reserve(space.size());
    for (const Scenario& s : space.scenarios()) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < budget; ++i) {
        const std::size_t j = i + uniform_below(rng, ids.size() - i);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(budget);
    return ids;
}

namespace {

double choose_count(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        if (c > 1e12) return c;  // far beyond any enumeration guard
    }
    return c;
}

}  // namespace

BruteForceResult brute_force_optimal(const ScenarioSpace& space, const HierModel& model,
                                     std::size_t budget) {
    if (budget > space.size())
        throw std::invalid_argument("brute_force_optimal: budget exceeds space");
    if (choose_count(space.size(), budget) > 1e5)
        throw std::invalid_argument("brute_force_optimal: too many subsets to enumerate");

    exact::ExactModel exact_model(model, space);
    BruteForceResult result;
    if (budget == 0) return result;

    std::vector<ScenarioId> ids;
    for (const Scenario& s : space.scenarios()) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());

    std::vector<std::size_t> comb(budget);
    for (std::size_t i = 0; i < budget; ++i) comb[i] = i;
    bool first = true;
    for (;;) {
        std::vector<ScenarioId> subset(budget);
        for (std::size_t i = 0; i < budget; ++i) subset[i] = ids[comb[i]];
        const double g = exact_model.information_gain(subset);
        if (first || g > result.gain) {
            result.gain = g;
            result.ids = subset;
            first = false;
        }
        // next combination in lexicographic order
        std::size_t i = budget;
        while (i > 0) {
            --i;
            if (comb[i] != i + ids.size() - budget) break;
            if (i == 0) return result;
        }
        ++comb[i];
        for (std::size_t j = i + 1; j < budget; ++j) comb[j] = comb[j - 1] + 1;
    }
}

std::string selection_trace_to_json(const SelectionTrace& trace) {
    nlohmann::json j;
    j["steps"] = nlohmann::json::array();
    for (const TraceStep& s : trace.steps) {
        j["steps"].push_back({{"step", s.step},
                              {"scenario_id", s.scenario_id},
                              {"gain_mean", s.gain.mean},
                              {"gain_ci", s.gain.ci_halfwidth},
                              {"n_samples", s.gain.n_samples}});
    }
    j["stopped_reason"] = to_string(trace.stopped_reason);
    if (trace.budget) j["budget"] = *trace.budget;
    return j.dump(2) + "\n";
}

std::string gain_curve_csv(const SelectionTrace& trace) {
    std::string out = "step,gain_mean,gain_lo,gain_hi\n";
    char line[160];
    for (const TraceStep& s : trace.steps) {
        std::snprintf(line, sizeof(line), "%u,%.10g,%.10g,%.10g\n", s.step, s.gain.mean,
                      s.gain.mean - s.gain.ci_halfwidth, s.gain.mean + s.gain.ci_halfwidth);
        out += line;
    }
    return out;
}

}  // namespace ps
