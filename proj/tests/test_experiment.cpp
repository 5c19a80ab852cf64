#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "plane_sample/experiment.hpp"
#include "plane_sample/stats.hpp"
#include "support/oracles.hpp"

namespace {

std::pair<ps::ScenarioSpace, std::vector<ps::Observation>> small_synthetic(
    std::size_t towns, std::size_t routes, std::vector<double> rates, std::uint64_t seed) {
    ps::SyntheticConfig config;
    config.n_hyperplanes = towns;
    config.scenarios_per_hyperplane = routes;
    config.true_rates = std::move(rates);
    ps::Rng rng(seed);
    return ps::generate_synthetic(config, rng);
}

}  // namespace

TEST_CASE("synthetic config defaults and rate ramp") {
    const ps::SyntheticConfig config;
    CHECK(config.n_hyperplanes == 6);
    CHECK(config.scenarios_per_hyperplane == 22);
    CHECK(config.traffic_levels == std::vector<int>{10, 150});
    CHECK(config.resolved_rates() == std::vector<double>{0.5, 0.8, 1.2, 1.6, 2.1, 2.7});

    ps::SyntheticConfig four;
    four.n_hyperplanes = 4;
    const auto ramp = four.resolved_rates();
    REQUIRE(ramp.size() == 4);
    CHECK(ramp.front() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ramp.back() == doctest::Approx(2.7).epsilon(1e-12));
    for (std::size_t i = 1; i < ramp.size(); ++i) CHECK(ramp[i] > ramp[i - 1]);

    ps::SyntheticConfig one;
    one.n_hyperplanes = 1;
    CHECK(one.resolved_rates() == std::vector<double>{0.5});
}

TEST_CASE("synthetic config validation") {
    ps::SyntheticConfig config;
    config.n_hyperplanes = 0;
    CHECK_THROWS_WITH_AS(config.validate(),
                         "synthetic config: need at least one town and one route",
                         std::invalid_argument);
    config = ps::SyntheticConfig{};
    config.traffic_levels.clear();
    CHECK_THROWS_WITH_AS(config.validate(), "synthetic config: traffic_levels must not be empty",
                         std::invalid_argument);
    config = ps::SyntheticConfig{};
    config.true_rates = std::vector<double>{1.0, 2.0};
    CHECK_THROWS_WITH_AS(config.validate(),
                         "synthetic config: true_rates length must equal n_hyperplanes",
                         std::invalid_argument);
    config.true_rates = std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0, 0.0};
    CHECK_THROWS_WITH_AS(config.validate(), "synthetic config: true_rates must be positive",
                         std::invalid_argument);
}

TEST_CASE("synthetic config JSON round trip") {
    ps::SyntheticConfig config;
    config.n_hyperplanes = 3;
    config.scenarios_per_hyperplane = 5;
    config.true_rates = std::vector<double>{0.4, 1.0, 2.5};
    config.traffic_levels = {20, 80, 300};
    config.seed = 99;

    const auto back = ps::SyntheticConfig::from_json_text(config.to_json_text());
    CHECK(back.n_hyperplanes == 3);
    CHECK(back.scenarios_per_hyperplane == 5);
    CHECK(back.true_rates == config.true_rates);
    CHECK(back.traffic_levels == config.traffic_levels);
    CHECK(back.seed == 99);

    const auto defaults = ps::SyntheticConfig::from_json_text("{}");
    CHECK(defaults.n_hyperplanes == 6);
    CHECK_FALSE(defaults.true_rates.has_value());

    CHECK_THROWS_AS(ps::SyntheticConfig::from_json_file("/nonexistent/config.json"),
                    std::runtime_error);
    CHECK_THROWS_AS(ps::SyntheticConfig::from_json_text(R"({"n_hyperplanes":0})"),
                    std::invalid_argument);
}

TEST_CASE("synthetic generation shape") {
    ps::SyntheticConfig config;  // 6 towns x 22 routes
    ps::Rng rng(7);
    const auto [space, obs] = ps::generate_synthetic(config, rng);

    REQUIRE(space.size() == 132);
    const auto& schema = space.schema();
    REQUIRE(schema.features.size() == 3);
    CHECK(schema.features[0].name == "traffic");
    CHECK(schema.features[0].levels == std::vector<std::string>{"10", "150"});
    CHECK(schema.features[1].name == "town");
    CHECK(schema.features[1].levels.front() == "Town01");
    CHECK(schema.features[1].levels.back() == "Town06");
    CHECK(schema.features[2].name == "route");
    CHECK(schema.features[2].levels.front() == "r01");
    CHECK(schema.features[2].levels.back() == "r22");
    CHECK(schema.hyperplane_feature == "town");

    // ids are row-major over (town, route); traffic splits the routes in half
    for (std::size_t t = 0; t < 6; ++t) {
        for (std::size_t r = 0; r < 22; ++r) {
            const auto& sc = space.scenarios()[t * 22 + r];
            CHECK(sc.id == t * 22 + r + 1);
            CHECK(sc.coords[1] == t);
            CHECK(sc.coords[2] == r);
            CHECK(sc.coords[0] == (r < 11 ? 0 : 1));
        }
    }

    REQUIRE(obs.size() == 132);
    for (std::size_t i = 0; i < obs.size(); ++i)
        CHECK(obs[i].scenario_id == space.scenarios()[i].id);

    ps::Rng rng2(7);
    const auto [space2, obs2] = ps::generate_synthetic(config, rng2);
    for (std::size_t i = 0; i < obs.size(); ++i) CHECK(obs[i].count == obs2[i].count);
}

TEST_CASE("synthetic counts track the per-town rates") {
    ps::SyntheticConfig config;
    ps::Rng rng(11);
    const auto [space, obs] = ps::generate_synthetic(config, rng);
    const auto rates = config.resolved_rates();

    for (std::size_t t = 0; t < 6; ++t) {
        double sum = 0.0;
        for (std::size_t r = 0; r < 22; ++r) sum += obs[t * 22 + r].count;
        const double mean = sum / 22.0;
        CHECK(std::abs(mean - rates[t]) < 3.0 * std::sqrt(rates[t] / 22.0));
    }
}

TEST_CASE("synthetic counts are Poisson-dispersed under equal rates") {
    // Pearson dispersion statistic ~ chi^2(n-1) for Poisson data; its p-value
    // should land in the central band for nearly every seed.
    std::size_t calibrated = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ps::SyntheticConfig config;
        config.true_rates = std::vector<double>(6, 1.5);
        ps::Rng rng(seed);
        const auto [space, obs] = ps::generate_synthetic(config, rng);
        double mean = 0.0;
        for (const auto& o : obs) mean += o.count;
        mean /= static_cast<double>(obs.size());
        double stat = 0.0;
        for (const auto& o : obs) {
            const double d = o.count - mean;
            stat += d * d / mean;
        }
        const double p = ps::stats::chi_square_sf(stat, static_cast<double>(obs.size() - 1));
        if (p > 0.005 && p < 0.995) ++calibrated;
    }
    CHECK(calibrated >= 18);
}

TEST_CASE("posterior predictive check accepts model data and rejects gross misfit") {
    ps::SyntheticConfig config;
    ps::Rng rng(7);
    const auto [space, obs] = ps::generate_synthetic(config, rng);
    const auto model = ps::HierModel::defaults();

    ps::Rng ppc_rng(100);
    const auto report = ps::posterior_predictive_check(obs, space, model, 300, ppc_rng);
    CHECK(report.n_replicates == 300);
    CHECK(report.support.size() == report.observed_freq.size());
    CHECK(report.support.size() == report.agrees.size());
    CHECK(report.fits);
    CHECK(report.agreement_fraction >= 0.8);
    for (std::size_t b = 0; b < report.support.size(); ++b) {
        CHECK(report.rep_lo[b] <= report.rep_hi[b] + 1e-15);
        CHECK(report.observed_freq[b] >= 0.0);
    }

    std::vector<ps::Observation> wall;
    for (const auto& sc : space.scenarios()) wall.push_back({sc.id, 40});
    ps::Rng misfit_rng(100);
    const auto flagged = ps::posterior_predictive_check(wall, space, model, 300, misfit_rng);
    CHECK_FALSE(flagged.fits);
    CHECK(flagged.agreement_fraction < 0.8);
}

TEST_CASE("posterior predictive check is deterministic and worker-independent") {
    const auto [space, obs] = small_synthetic(2, 6, {0.8, 2.0}, 5);
    const auto model = ps::HierModel::defaults();

    ps::Rng r1(50), r2(50), r3(50);
    const auto a = ps::posterior_predictive_check(obs, space, model, 64, r1, 1);
    const auto b = ps::posterior_predictive_check(obs, space, model, 64, r2, 1);
    const auto c = ps::posterior_predictive_check(obs, space, model, 64, r3, 3);
    CHECK(a.agreement_fraction == b.agreement_fraction);
    CHECK(a.rep_lo == c.rep_lo);
    CHECK(a.rep_hi == c.rep_hi);
    CHECK(a.rep_mean == c.rep_mean);
    CHECK(a.support == c.support);
    CHECK(ps::ppc_report_to_json(a) == ps::ppc_report_to_json(c));
}

TEST_CASE("posterior predictive check input validation") {
    const auto [space, obs] = small_synthetic(2, 3, {1.0, 1.0}, 1);
    const auto model = ps::HierModel::defaults();
    ps::Rng rng(1);
    CHECK_THROWS_WITH_AS(ps::posterior_predictive_check({}, space, model, 10, rng),
                         "nothing to check", std::invalid_argument);
    CHECK_THROWS_WITH_AS(ps::posterior_predictive_check(obs, space, model, 1, rng),
                         "posterior_predictive_check: need at least 2 replicates",
                         std::invalid_argument);
}

TEST_CASE("ppc report JSON shape") {
    const auto [space, obs] = small_synthetic(2, 4, {0.7, 1.8}, 9);
    ps::Rng rng(9);
    const auto report =
        ps::posterior_predictive_check(obs, space, ps::HierModel::defaults(), 40, rng);
    const auto j = nlohmann::json::parse(ps::ppc_report_to_json(report));
    CHECK(j.at("n_replicates").get<std::size_t>() == 40);
    CHECK(j.at("fits").is_boolean());
    CHECK(j.at("agreement_fraction").get<double>() == report.agreement_fraction);
    REQUIRE(j.at("bins").size() == report.support.size());
    const auto& bin = j.at("bins")[0];
    CHECK(bin.at("count").get<std::uint32_t>() == report.support[0]);
    CHECK(bin.contains("observed_freq"));
    CHECK(bin.contains("replicated_mean"));
    CHECK(bin.contains("replicated_lo"));
    CHECK(bin.contains("replicated_hi"));
    CHECK(bin.contains("agrees"));
}

TEST_CASE("method comparison structure") {
    const auto [space, obs] = small_synthetic(2, 4, {0.6, 2.4}, 13);
    const auto model = ps::HierModel::defaults();

    ps::ComparisonOptions options;
    options.horizon = 5;
    options.mc = ps::McOptions{0.90, 0.05, 1500, 50, false};
    options.workers = 2;

    const auto report = ps::run_comparison(space, model, 2, 77, options);
    CHECK(report.horizon == 5);
    CHECK(report.n_runs == 2);
    CHECK(report.confidence == 0.90);
    CHECK(report.seed == 77);
    CHECK(report.greedy.name == "greedy");
    CHECK(report.lhs.name == "lhs");
    CHECK(report.random.name == "random");

    for (const auto* method : {&report.greedy, &report.lhs, &report.random}) {
        REQUIRE(method->runs.size() == 2);
        double stop_sum = 0.0, plateau_sum = 0.0;
        for (const auto& run : method->runs) {
            REQUIRE(run.order.size() == 5);
            REQUIRE(run.curve.size() == 5);
            for (auto id : run.order) CHECK(space.contains(id));
            auto sorted = run.order;
            std::sort(sorted.begin(), sorted.end());
            CHECK(std::unique(sorted.begin(), sorted.end()) == sorted.end());
            CHECK(run.stop_index <= 5);
            CHECK(run.plateau_gain == run.curve.back().mean);
            for (std::size_t k = 1; k < run.curve.size(); ++k) {
                CHECK(run.curve[k].mean >= run.curve[k - 1].mean -
                                               run.curve[k].ci_halfwidth -
                                               run.curve[k - 1].ci_halfwidth);
            }
            for (const auto& e : run.curve) CHECK(e.n_samples >= 1);
            stop_sum += static_cast<double>(run.stop_index);
            plateau_sum += run.plateau_gain;
        }
        CHECK(method->mean_stop == doctest::Approx(stop_sum / 2.0).epsilon(1e-14));
        CHECK(method->mean_plateau == doctest::Approx(plateau_sum / 2.0).epsilon(1e-14));
    }

    const auto j = nlohmann::json::parse(ps::comparison_report_to_json(report));
    CHECK(j.at("horizon").get<std::size_t>() == 5);
    CHECK(j.at("n_runs").get<std::size_t>() == 2);
    CHECK(j.at("seed").get<std::uint64_t>() == 77);
    for (const char* name : {"greedy", "lhs", "random"}) {
        const auto& jm = j.at("methods").at(name);
        CHECK(jm.contains("mean_stop"));
        CHECK(jm.contains("mean_plateau"));
        REQUIRE(jm.at("runs").size() == 2);
        const auto& run = jm.at("runs")[0];
        CHECK(run.at("order").size() == 5);
        REQUIRE(run.at("curve").size() == 5);
        CHECK(run.at("curve")[0].at("step").get<std::size_t>() == 1);
        CHECK(run.at("curve")[0].contains("gain_mean"));
        CHECK(run.at("curve")[0].contains("gain_ci"));
        CHECK(run.at("curve")[0].contains("n_samples"));
    }

    // band over two runs brackets the mean
    const std::string csv = ps::method_curve_csv(report.random);
    REQUIRE(csv.rfind("step,gain_mean,gain_lo,gain_hi\n", 0) == 0);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        double step, mean, lo, hi;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &step, &mean, &lo, &hi) == 4);
        CHECK(lo <= mean + 1e-12);
        CHECK(mean <= hi + 1e-12);
        ++rows;
    }
    CHECK(rows == 5);
}

TEST_CASE("method comparison determinism, worker independence and horizon clamping") {
    const auto [space, obs] = small_synthetic(2, 3, {0.7, 2.0}, 21);
    const auto model = ps::HierModel::defaults();

    ps::ComparisonOptions options;
    options.horizon = 25;  // clamps to the 6 scenarios available
    options.mc = ps::McOptions{0.90, 0.1, 800, 50, false};

    const auto a = ps::run_comparison(space, model, 1, 5, options);
    CHECK(a.horizon == 6);
    const auto b = ps::run_comparison(space, model, 1, 5, options);
    options.workers = 3;
    const auto c = ps::run_comparison(space, model, 1, 5, options);

    const std::string ja = ps::comparison_report_to_json(a);
    CHECK(ja == ps::comparison_report_to_json(b));
    CHECK(ja == ps::comparison_report_to_json(c));

    // one run: the band in the CSV collapses onto the mean
    const std::string csv = ps::method_curve_csv(a.greedy);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        double step, mean, lo, hi;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &step, &mean, &lo, &hi) == 4);
        CHECK(lo == mean);
        CHECK(hi == mean);
    }
}

TEST_CASE("method comparison input validation") {
    const auto [space, obs] = small_synthetic(2, 3, {1.0, 1.0}, 2);
    const auto model = ps::HierModel::defaults();
    CHECK_THROWS_WITH_AS(ps::run_comparison(space, model, 0, 1, {}),
                         "run_comparison: need at least one run", std::invalid_argument);
    CHECK_THROWS_WITH_AS(ps::run_comparison(ps::ScenarioSpace{}, model, 1, 1, {}),
                         "run_comparison: empty scenario space", std::invalid_argument);
}
