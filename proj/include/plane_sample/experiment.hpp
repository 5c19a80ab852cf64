#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plane_sample/inference.hpp"
#include "plane_sample/rng.hpp"
#include "plane_sample/scenario_space.hpp"
#include "plane_sample/selection.hpp"

namespace ps {

// Shape of the synthetic benchmark dataset: a (town x route) lattice with a
// per-town Poisson event rate, traffic participant counts attached as a
// metadata feature.
struct SyntheticConfig {
    std::size_t n_hyperplanes = 6;
    std::size_t scenarios_per_hyperplane = 22;
    std::optional<std::vector<double>> true_rates;  // one per hyperplane
    std::vector<int> traffic_levels = {10, 150};
    std::uint64_t seed = 0;

    void validate() const;
    std::vector<double> resolved_rates() const;  // default: geometric ramp 0.5 -> 2.7

    static SyntheticConfig from_json_file(const std::string& path);
    static SyntheticConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

std::pair<ScenarioSpace, std::vector<Observation>> generate_synthetic(const SyntheticConfig& config,
                                                                      Rng& rng);

// Posterior predictive check: replicate datasets from the joint grid posterior
// and compare per-count-value frequencies against the observed histogram. A
// bin agrees when the observed frequency lies inside the replicates' central
// 90% band.
struct PPCReport {
    std::vector<std::uint32_t> support;  // count values 0..K
    std::vector<double> observed_freq;
    std::vector<double> rep_mean;
    std::vector<double> rep_lo;  // 5th percentile across replicates
    std::vector<double> rep_hi;  // 95th percentile
    std::vector<bool> agrees;
    double agreement_fraction = 0.0;
    bool fits = false;  // agreement_fraction >= 0.8
    std::size_t n_replicates = 0;
};

PPCReport posterior_predictive_check(const std::vector<Observation>& observations,
                                     const ScenarioSpace& space, const HierModel& model,
                                     std::size_t n_replicates, Rng& rng,
                                     std::size_t workers = 1);

std::string ppc_report_to_json(const PPCReport& report);

// Info-gain curves for greedy / LHS / random over n_runs derived seeds, each
// run carried to `horizon` scenarios with the plateau position annotated along
// the curve. The estimator here runs tighter than the interactive default:
// plateau positions are only comparable across methods when the curve noise is
// small against the marginal gains being tested.
struct ComparisonOptions {
    std::size_t horizon = 25;
    double confidence = 0.90;
    McOptions mc{0.90, 0.02, 4000, 50, false};
    std::size_t workers = 1;
};

struct MethodRun {
    std::vector<ScenarioId> order;
    std::vector<GainEstimate> curve;  // curve[k] = gain of the first k+1 scenarios
    std::size_t stop_index = 0;       // scenarios retained by the plateau rule
    double plateau_gain = 0.0;        // final curve mean
};

struct MethodReport {
    std::string name;
    std::vector<MethodRun> runs;
    double mean_stop = 0.0;
    double mean_plateau = 0.0;
};

struct ComparisonReport {
    std::size_t horizon = 0;
    std::size_t n_runs = 0;
    double confidence = 0.90;
    std::uint64_t seed = 0;
    MethodReport greedy, lhs, random;
};

ComparisonReport run_comparison(const ScenarioSpace& space, const HierModel& model,
                                std::size_t n_runs, std::uint64_t seed,
                                const ComparisonOptions& options = {});

std::string comparison_report_to_json(const ComparisonReport& report);
std::string method_curve_csv(const MethodReport& method);  // banded across runs

}  // namespace ps
