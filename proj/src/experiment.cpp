#include "plane_sample/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "plane_sample/log.hpp"
#include "plane_sample/parallel.hpp"

namespace ps {

namespace {

using nlohmann::json;

std::string pad2(std::size_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%02zu", v);
    return buf;
}

std::size_t draw_categorical(std::span<const double> mass, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        acc += mass[i];
        if (u < acc) return i;
    }
    return mass.size() - 1;  // u landed in the rounding slack at the top
}

}  // namespace

void SyntheticConfig::validate() const {
    if (n_hyperplanes < 1 || scenarios_per_hyperplane < 1)
        throw std::invalid_argument("synthetic config: need at least one town and one route");
    if (traffic_levels.empty())
        throw std::invalid_argument("synthetic config: traffic_levels must not be empty");
    if (true_rates) {
        if (true_rates->size() != n_hyperplanes)
            throw std::invalid_argument("synthetic config: true_rates length must equal n_hyperplanes");
        for (double r : *true_rates)
            if (!(r > 0.0)) throw std::invalid_argument("synthetic config: true_rates must be positive");
    }
}

std::vector<double> SyntheticConfig::resolved_rates() const {
    if (true_rates) return *true_rates;
    if (n_hyperplanes == 6) return {0.5, 0.8, 1.2, 1.6, 2.1, 2.7};
    std::vector<double> rates(n_hyperplanes);
    for (std::size_t i = 0; i < n_hyperplanes; ++i) {
        const double t = n_hyperplanes == 1
                             ? 0.0
                             : static_cast<double>(i) / static_cast<double>(n_hyperplanes - 1);
        rates[i] = 0.5 * std::pow(2.7 / 0.5, t);
    }
    return rates;
}

SyntheticConfig SyntheticConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open synthetic config");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_text(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

SyntheticConfig SyntheticConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    SyntheticConfig c;
    if (j.contains("n_hyperplanes")) c.n_hyperplanes = j.at("n_hyperplanes").get<std::size_t>();
    if (j.contains("scenarios_per_hyperplane"))
        c.scenarios_per_hyperplane = j.at("scenarios_per_hyperplane").get<std::size_t>();
    if (j.contains("true_rates") && !j.at("true_rates").is_null())
        c.true_rates = j.at("true_rates").get<std::vector<double>>();
    if (j.contains("traffic_levels")) c.traffic_levels = j.at("traffic_levels").get<std::vector<int>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

std::string SyntheticConfig::to_json_text() const {
    json j;
    j["n_hyperplanes"] = n_hyperplanes;
    j["scenarios_per_hyperplane"] = scenarios_per_hyperplane;
    if (true_rates) j["true_rates"] = *true_rates;
    j["traffic_levels"] = traffic_levels;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

std::pair<ScenarioSpace, std::vector<Observation>> generate_synthetic(const SyntheticConfig& config,
                                                                      Rng& rng) {
    config.validate();
    const std::size_t towns = config.n_hyperplanes;
    const std::size_t routes = config.scenarios_per_hyperplane;
    const std::size_t n_traffic = config.traffic_levels.size();

    FeatureSchema schema;
    Feature traffic{"traffic", {}};
    for (int lvl : config.traffic_levels) traffic.levels.push_back(std::to_string(lvl));
    Feature town{"town", {}};
    for (std::size_t t = 0; t < towns; ++t) town.levels.push_back("Town" + pad2(t + 1));
    Feature route{"route", {}};
    for (std::size_t r = 0; r < routes; ++r) route.levels.push_back("r" + pad2(r + 1));
    schema.features = {traffic, town, route};
    schema.hyperplane_feature = "town";

    std::vector<Scenario> scenarios;
    scenarios.reserve(towns * routes);
    for (std::size_t t = 0; t < towns; ++t)
        for (std::size_t r = 0; r < routes; ++r) {
            Scenario sc;
            sc.id = static_cast<ScenarioId>(t * routes + r + 1);
            const std::uint32_t traffic_idx = static_cast<std::uint32_t>(r * n_traffic / routes);
            sc.coords = {traffic_idx, static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(r)};
            scenarios.push_back(sc);
        }
    ScenarioSpace space(schema, scenarios);

    const std::vector<double> rates = config.resolved_rates();
    std::vector<Observation> observations;
    observations.reserve(space.size());
    for (const Scenario& sc : space.scenarios()) {
        const std::size_t t = sc.coords[1];
        observations.push_back(
            {sc.id, static_cast<std::uint32_t>(poisson(rng, rates[t]))});
    }
    return {std::move(space), std::move(observations)};
}

PPCReport posterior_predictive_check(const std::vector<Observation>& observations,
                                     const ScenarioSpace& space, const HierModel& model,
                                     std::size_t n_replicates, Rng& rng, std::size_t workers) {
    if (observations.empty()) throw std::invalid_argument("nothing to check");
    if (n_replicates < 2)
        throw std::invalid_argument("posterior_predictive_check: need at least 2 replicates");

    GainEngine engine(model, space);
    const GroupedCounts grouped = group_counts_by_hyperplane(observations, space);
    const PosteriorGrid post = engine.posterior_sigma(grouped);

    const std::size_t n_levels = space.schema().hyperplane().levels.size();
    std::vector<std::uint64_t> level_m(n_levels, 0), level_s(n_levels, 0);
    for (std::size_t g = 0; g < grouped.level_indices.size(); ++g) {
        level_m[grouped.level_indices[g]] = grouped.counts[g].size();
        std::uint64_t s = 0;
        for (std::uint32_t c : grouped.counts[g]) s += c;
        level_s[grouped.level_indices[g]] = s;
    }
    std::vector<std::size_t> obs_level(observations.size());
    for (std::size_t i = 0; i < observations.size(); ++i)
        obs_level[i] = space.hyperplane_level(observations[i].scenario_id);

    const std::uint32_t cap = model.count_cap;
    const std::size_t bins = cap + 1;
    const double n_obs = static_cast<double>(observations.size());

    std::vector<double> observed(bins, 0.0);
    for (const Observation& o : observations) observed[std::min(o.count, cap)] += 1.0 / n_obs;

    // Replicates are seeded independently so the histogram set is identical
    // for any worker count.
    const std::uint64_t base_seed = rng();
    std::vector<std::vector<double>> rep(n_replicates);
    parallel_for(n_replicates, workers, [&](std::size_t r) {
        Rng rep_rng(derive_seed(base_seed, r));
        const std::size_t j = draw_categorical(post.mass, rep_rng);
        std::vector<double> rate(n_levels);
        for (std::size_t l = 0; l < n_levels; ++l) {
            const auto cond = engine.rate_posterior(level_m[l], level_s[l], j);
            rate[l] = engine.model().rate_grid.points[draw_categorical(cond, rep_rng)];
        }
        std::vector<double> hist(bins, 0.0);
        for (std::size_t i = 0; i < obs_level.size(); ++i) {
            const std::uint64_t c = poisson(rep_rng, rate[obs_level[i]]);
            hist[std::min<std::uint64_t>(c, cap)] += 1.0 / n_obs;
        }
        rep[r] = std::move(hist);
    });

    // Trim the support to bins that carry any mass on either side.
    std::size_t top = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (observed[b] > 0.0) top = b;
        for (std::size_t r = 0; r < n_replicates; ++r)
            if (rep[r][b] > 0.0) top = std::max(top, b);
    }

    PPCReport report;
    report.n_replicates = n_replicates;
    std::vector<double> column(n_replicates);
    std::size_t agree_count = 0;
    for (std::size_t b = 0; b <= top; ++b) {
        for (std::size_t r = 0; r < n_replicates; ++r) column[r] = rep[r][b];
        std::sort(column.begin(), column.end());
        const auto lo_idx = static_cast<std::size_t>(
            std::floor(0.05 * static_cast<double>(n_replicates - 1)));
        const auto hi_idx = static_cast<std::size_t>(
            std::ceil(0.95 * static_cast<double>(n_replicates - 1)));
        double mean = 0.0;
        for (double v : column) mean += v;
        mean /= static_cast<double>(n_replicates);

        report.support.push_back(static_cast<std::uint32_t>(b));
        report.observed_freq.push_back(observed[b]);
        report.rep_mean.push_back(mean);
        report.rep_lo.push_back(column[lo_idx]);
        report.rep_hi.push_back(column[hi_idx]);
        const bool ok = observed[b] >= column[lo_idx] - 1e-12 &&
                        observed[b] <= column[hi_idx] + 1e-12;
        report.agrees.push_back(ok);
        if (ok) ++agree_count;
    }
    report.agreement_fraction =
        static_cast<double>(agree_count) / static_cast<double>(report.support.size());
    report.fits = report.agreement_fraction >= 0.8;
    return report;
}

std::string ppc_report_to_json(const PPCReport& report) {
    json j;
    j["n_replicates"] = report.n_replicates;
    j["agreement_fraction"] = report.agreement_fraction;
    j["fits"] = report.fits;
    j["bins"] = json::array();
    for (std::size_t b = 0; b < report.support.size(); ++b) {
        j["bins"].push_back({{"count", report.support[b]},
                             {"observed_freq", report.observed_freq[b]},
                             {"replicated_mean", report.rep_mean[b]},
                             {"replicated_lo", report.rep_lo[b]},
                             {"replicated_hi", report.rep_hi[b]},
                             {"agrees", static_cast<bool>(report.agrees[b])}});
    }
    return j.dump(2) + "\n";
}

namespace {

std::size_t scan_stop(std::span<const GainEstimate> curve, double confidence) {
    // The plateau begins once no later step shows a significant rise, so the
    // stopping index is the last step the test would still accept.  A single
    // flat pair early in a non-greedy order must not truncate the scan.
    std::size_t last = 0;
    GainEstimate prev;
    prev.confidence = confidence;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (stopping_test(prev, curve[k], confidence)) last = k + 1;
        prev = curve[k];
    }
    return last;
}

MethodRun finish_run(std::vector<ScenarioId> order, std::vector<GainEstimate> curve,
                     double confidence) {
    MethodRun run;
    run.order = std::move(order);
    run.curve = std::move(curve);
    run.stop_index = scan_stop(run.curve, confidence);
    run.plateau_gain = run.curve.empty() ? 0.0 : run.curve.back().mean;
    return run;
}

MethodRun prefix_curve_run(const GainEngine& engine, std::vector<ScenarioId> order,
                           const ComparisonOptions& options, std::uint64_t run_seed) {
    // One seed shared by every prefix length: the estimates ride on common
    // random numbers, so adjacent-step differences are nearly noise-free and
    // the plateau scan reacts to the order, not to resampling jitter.
    const std::uint64_t crn_seed = derive_seed(run_seed, 1000);
    std::vector<GainEstimate> curve(order.size());
    parallel_for(order.size(), options.workers, [&](std::size_t k) {
        const std::span<const ScenarioId> prefix(order.data(), k + 1);
        curve[k] = engine.information_gain(prefix, options.mc, crn_seed);
    });
    return finish_run(std::move(order), std::move(curve), options.confidence);
}

void summarize(MethodReport& m) {
    double stop = 0.0, plateau = 0.0;
    for (const MethodRun& r : m.runs) {
        stop += static_cast<double>(r.stop_index);
        plateau += r.plateau_gain;
    }
    const auto n = static_cast<double>(m.runs.size());
    m.mean_stop = m.runs.empty() ? 0.0 : stop / n;
    m.mean_plateau = m.runs.empty() ? 0.0 : plateau / n;
}

}  // namespace

ComparisonReport run_comparison(const ScenarioSpace& space, const HierModel& model,
                                std::size_t n_runs, std::uint64_t seed,
                                const ComparisonOptions& options) {
    if (n_runs < 1) throw std::invalid_argument("run_comparison: need at least one run");
    const std::size_t horizon = std::min(options.horizon, space.size());
    if (horizon == 0) throw std::invalid_argument("run_comparison: empty scenario space");

    GainEngine engine(model, space);
    ComparisonReport report;
    report.horizon = horizon;
    report.n_runs = n_runs;
    report.confidence = options.confidence;
    report.seed = seed;
    report.greedy.name = "greedy";
    report.lhs.name = "lhs";
    report.random.name = "random";

    McGainOracle oracle(engine, options.mc);
    for (std::size_t r = 0; r < n_runs; ++r) {
        const std::uint64_t run_seed = derive_seed(seed, r);
        Rng rng(run_seed);
        SelectionOptions sel;
        sel.budget = horizon;
        sel.confidence = options.confidence;
        sel.stop_on_plateau = false;
        sel.workers = options.workers;
        const SelectionTrace trace = greedy_select(oracle, space, sel, rng);
        // Re-estimate the chosen order's curve the same way as the baselines
        // so all three methods face an identical plateau scan.
        report.greedy.runs.push_back(
            prefix_curve_run(engine, trace.selected(), options, run_seed));
        log::info("comparison: greedy run " + std::to_string(r) + " stop " +
                  std::to_string(report.greedy.runs.back().stop_index));
    }
    for (std::size_t r = 0; r < n_runs; ++r) {
        const std::uint64_t run_seed = derive_seed(seed, 100 + r);
        Rng rng(run_seed);
        report.lhs.runs.push_back(
            prefix_curve_run(engine, lhs_select(space, horizon, rng), options, run_seed));
    }
    for (std::size_t r = 0; r < n_runs; ++r) {
        const std::uint64_t run_seed = derive_seed(seed, 200 + r);
        Rng rng(run_seed);
        report.random.runs.push_back(
            prefix_curve_run(engine, random_select(space, horizon, rng), options, run_seed));
    }
    summarize(report.greedy);
    summarize(report.lhs);
    summarize(report.random);
    return report;
}

namespace {

json method_to_json(const MethodReport& m) {
    json jm;
    jm["mean_stop"] = m.mean_stop;
    jm["mean_plateau"] = m.mean_plateau;
    jm["runs"] = json::array();
    for (const MethodRun& r : m.runs) {
        json jr;
        jr["stop_index"] = r.stop_index;
        jr["plateau_gain"] = r.plateau_gain;
        jr["order"] = r.order;
        jr["curve"] = json::array();
        for (std::size_t k = 0; k < r.curve.size(); ++k) {
            jr["curve"].push_back({{"step", k + 1},
                                   {"gain_mean", r.curve[k].mean},
                                   {"gain_ci", r.curve[k].ci_halfwidth},
                                   {"n_samples", r.curve[k].n_samples}});
        }
        jm["runs"].push_back(std::move(jr));
    }
    return jm;
}

}  // namespace

std::string comparison_report_to_json(const ComparisonReport& report) {
    json j;
    j["horizon"] = report.horizon;
    j["n_runs"] = report.n_runs;
    j["confidence"] = report.confidence;
    j["seed"] = report.seed;
    j["methods"] = {{"greedy", method_to_json(report.greedy)},
                    {"lhs", method_to_json(report.lhs)},
                    {"random", method_to_json(report.random)}};
    return j.dump(2) + "\n";
}

std::string method_curve_csv(const MethodReport& method) {
    std::size_t horizon = 0;
    for (const MethodRun& r : method.runs) horizon = std::max(horizon, r.curve.size());
    std::string out = "step,gain_mean,gain_lo,gain_hi\n";
    char line[160];
    for (std::size_t k = 0; k < horizon; ++k) {
        // Band = spread of the run means (a single run has zero width); the
        // per-run CIs live in the JSON report.
        double mean = 0.0, lo = 0.0, hi = 0.0;
        std::size_t n = 0;
        for (const MethodRun& r : method.runs) {
            if (k >= r.curve.size()) continue;
            const double m = r.curve[k].mean;
            mean += m;
            if (n == 0 || m < lo) lo = m;
            if (n == 0 || m > hi) hi = m;
            ++n;
        }
        if (n == 0) continue;
        mean /= static_cast<double>(n);
        std::snprintf(line, sizeof(line), "%zu,%.10g,%.10g,%.10g\n", k + 1, mean, lo, hi);
        out += line;
    }
    return out;
}

}  // namespace ps
