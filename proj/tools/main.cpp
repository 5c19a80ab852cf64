#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "plane_sample/csv_io.hpp"
#include "plane_sample/experiment.hpp"
#include "plane_sample/hier_model.hpp"
#include "plane_sample/inference.hpp"
#include "plane_sample/log.hpp"
#include "plane_sample/manifest.hpp"
#include "plane_sample/selection.hpp"
#include "plane_sample/svg.hpp"

namespace fs = std::filesystem;
using namespace ps;

namespace {

constexpr const char* kGreedyColor = "#d62728";
constexpr const char* kLhsColor = "#1f77b4";
constexpr const char* kRandomColor = "#e0a417";

class Timer {
  public:
    double seconds() const {
        const auto dt = std::chrono::steady_clock::now() - start_;
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
        return static_cast<double>(ms) / 1000.0;
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

HierModel load_model(const std::string& path) {
    return path.empty() ? HierModel::defaults() : HierModel::from_json_file(path);
}

Objective parse_objective(const std::string& text, const ScenarioSpace& space) {
    if (text == "sigma") return {};
    const std::string prefix = "hyperplane:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string level = text.substr(prefix.size());
        const auto& schema = space.schema();
        const auto idx = schema.level_index(schema.hyperplane_index(), level);
        if (!idx) throw std::runtime_error("unknown hyperplane level: " + level);
        return {Objective::Kind::hyperplane, *idx};
    }
    throw std::runtime_error("objective must be 'sigma' or 'hyperplane:<level>'");
}

std::string trace_svg(const SelectionTrace& trace) {
    svg::Plot plot;
    plot.title = "Information gain per selection step";
    plot.x_label = "scenarios selected";
    plot.y_label = "information gain (nats)";
    svg::Series mean{"gain", kGreedyColor, {}, {}};
    svg::Band band{kGreedyColor, {}, {}, {}};
    for (const TraceStep& s : trace.steps) {
        mean.x.push_back(s.step);
        mean.y.push_back(s.gain.mean);
        band.x.push_back(s.step);
        band.lo.push_back(s.gain.mean - s.gain.ci_halfwidth);
        band.hi.push_back(s.gain.mean + s.gain.ci_halfwidth);
    }
    plot.bands.push_back(band);
    plot.series.push_back(mean);
    return plot.render();
}

void add_method(svg::Plot& plot, const MethodReport& method, const std::string& color) {
    svg::Series mean{method.name, color, {}, {}};
    svg::Band band{color, {}, {}, {}};
    std::size_t horizon = 0;
    for (const MethodRun& r : method.runs) horizon = std::max(horizon, r.curve.size());
    for (std::size_t k = 0; k < horizon; ++k) {
        // Band across run means, matching the exported CSV.
        double m = 0.0, lo = 0.0, hi = 0.0;
        std::size_t n = 0;
        for (const MethodRun& r : method.runs) {
            if (k >= r.curve.size()) continue;
            const double v = r.curve[k].mean;
            m += v;
            if (n == 0 || v < lo) lo = v;
            if (n == 0 || v > hi) hi = v;
            ++n;
        }
        if (n == 0) continue;
        mean.x.push_back(static_cast<double>(k + 1));
        mean.y.push_back(m / static_cast<double>(n));
        band.x.push_back(static_cast<double>(k + 1));
        band.lo.push_back(lo);
        band.hi.push_back(hi);
    }
    plot.bands.push_back(band);
    plot.series.push_back(mean);
    plot.vlines.push_back({method.mean_stop, color, ""});
}

std::string comparison_svg(const ComparisonReport& report) {
    svg::Plot plot;
    plot.title = "Information gain: greedy vs LHS vs random";
    plot.x_label = "scenarios selected";
    plot.y_label = "information gain (nats)";
    add_method(plot, report.greedy, kGreedyColor);
    add_method(plot, report.lhs, kLhsColor);
    add_method(plot, report.random, kRandomColor);
    return plot.render();
}

std::string ppc_svg(const PPCReport& report) {
    svg::Plot plot;
    plot.title = "Posterior predictive check";
    plot.x_label = "event count";
    plot.y_label = "frequency";
    svg::Band band{kLhsColor, {}, {}, {}};
    svg::Series rep{"replicated mean", kLhsColor, {}, {}};
    svg::Series obs{"observed", kGreedyColor, {}, {}};
    for (std::size_t b = 0; b < report.support.size(); ++b) {
        const double x = report.support[b];
        band.x.push_back(x);
        band.lo.push_back(report.rep_lo[b]);
        band.hi.push_back(report.rep_hi[b]);
        rep.x.push_back(x);
        rep.y.push_back(report.rep_mean[b]);
        obs.x.push_back(x);
        obs.y.push_back(report.observed_freq[b]);
    }
    plot.bands.push_back(band);
    plot.series.push_back(rep);
    plot.series.push_back(obs);
    return plot.render();
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed) {
    Timer timer;
    SyntheticConfig config =
        config_path.empty() ? SyntheticConfig{} : SyntheticConfig::from_json_file(config_path);
    if (seed) config.seed = *seed;
    Rng rng(config.seed);
    const auto [space, observations] = generate_synthetic(config, rng);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    save_space(space, dir / "scenarios.csv");
    save_observations(observations, dir / "observations.csv");

    RunManifest manifest;
    manifest.command = "generate";
    manifest.config_hash = config_hash_hex(config.to_json_text());
    manifest.seed = config.seed;
    if (!config_path.empty()) manifest.input_paths.push_back(config_path);
    manifest.output_paths = {(dir / "scenarios.csv").string(),
                             (dir / "observations.csv").string()};
    manifest.duration_seconds = timer.seconds();
    write_file(dir / "manifest.json", manifest.to_json_text());
    std::cout << "wrote " << space.size() << " scenarios to " << (dir / "scenarios.csv").string()
              << "\n";
    return 0;
}

int cmd_select(const std::string& scenarios_path, const std::string& model_path,
               const std::string& objective_text, double confidence, double abs_error,
               std::optional<std::size_t> budget, std::uint64_t seed, const std::string& out_dir,
               std::size_t workers) {
    Timer timer;
    const ScenarioSpace space = load_space(scenarios_path);
    const HierModel model = load_model(model_path);
    const Objective objective = parse_objective(objective_text, space);

    GainEngine engine(model, space);
    McOptions mc;
    mc.confidence = confidence;
    mc.abs_error = abs_error;
    McGainOracle oracle(engine, mc, objective);
    SelectionOptions opts;
    opts.budget = budget;
    opts.confidence = confidence;
    opts.workers = workers;
    Rng rng(seed);
    const SelectionTrace trace = greedy_select(oracle, space, opts, rng);

    const fs::path dir(out_dir);
    write_file(dir / "trace.json", selection_trace_to_json(trace));
    write_file(dir / "gain_curve.csv", gain_curve_csv(trace));
    write_file(dir / "gain_curve.svg", trace_svg(trace));

    RunManifest manifest;
    manifest.command = "select";
    manifest.config_hash = config_hash_hex(model.to_json_text());
    manifest.seed = seed;
    manifest.input_paths.push_back(scenarios_path);
    if (!model_path.empty()) manifest.input_paths.push_back(model_path);
    manifest.output_paths = {(dir / "trace.json").string(), (dir / "gain_curve.csv").string(),
                             (dir / "gain_curve.svg").string()};
    manifest.duration_seconds = timer.seconds();
    write_file(dir / "manifest.json", manifest.to_json_text());
    std::cout << "selected " << trace.steps.size() << " scenarios ("
              << to_string(trace.stopped_reason) << ")\n";
    return 0;
}

int cmd_compare(const std::string& scenarios_path, const std::string& model_path,
                std::size_t runs, std::uint64_t seed, const std::string& out_dir,
                std::size_t workers) {
    Timer timer;
    const ScenarioSpace space = load_space(scenarios_path);
    const HierModel model = load_model(model_path);
    ComparisonOptions options;
    options.workers = workers;
    const ComparisonReport report = run_comparison(space, model, runs, seed, options);

    const fs::path dir(out_dir);
    write_file(dir / "comparison.json", comparison_report_to_json(report));
    write_file(dir / "greedy.csv", method_curve_csv(report.greedy));
    write_file(dir / "lhs.csv", method_curve_csv(report.lhs));
    write_file(dir / "random.csv", method_curve_csv(report.random));
    write_file(dir / "comparison.svg", comparison_svg(report));

    RunManifest manifest;
    manifest.command = "compare";
    manifest.config_hash = config_hash_hex(model.to_json_text());
    manifest.seed = seed;
    manifest.input_paths.push_back(scenarios_path);
    if (!model_path.empty()) manifest.input_paths.push_back(model_path);
    manifest.output_paths = {(dir / "comparison.json").string(), (dir / "greedy.csv").string(),
                             (dir / "lhs.csv").string(), (dir / "random.csv").string(),
                             (dir / "comparison.svg").string()};
    manifest.duration_seconds = timer.seconds();
    write_file(dir / "manifest.json", manifest.to_json_text());
    std::cout << "greedy mean stop " << report.greedy.mean_stop << ", lhs "
              << report.lhs.mean_stop << ", random " << report.random.mean_stop << "\n";
    return 0;
}

int cmd_ppc(const std::string& scenarios_path, const std::string& observations_path,
            const std::string& model_path, const std::string& out_dir, std::size_t workers) {
    Timer timer;
    const ScenarioSpace space = load_space(scenarios_path);
    const std::vector<Observation> observations = load_observations(observations_path, space);
    const HierModel model = load_model(model_path);
    Rng rng(0);  // the check is a fixed diagnostic; no seed flag
    const PPCReport report =
        posterior_predictive_check(observations, space, model, 500, rng, workers);

    const fs::path dir(out_dir);
    write_file(dir / "ppc.json", ppc_report_to_json(report));
    write_file(dir / "ppc.svg", ppc_svg(report));

    RunManifest manifest;
    manifest.command = "ppc";
    manifest.config_hash = config_hash_hex(model.to_json_text());
    manifest.seed = 0;
    manifest.input_paths = {scenarios_path, observations_path};
    if (!model_path.empty()) manifest.input_paths.push_back(model_path);
    manifest.output_paths = {(dir / "ppc.json").string(), (dir / "ppc.svg").string()};
    manifest.duration_seconds = timer.seconds();
    write_file(dir / "manifest.json", manifest.to_json_text());
    std::cout << (report.fits ? "fit ok" : "misfit flagged") << ": "
              << report.agreement_fraction * 100.0 << "% of bins agree\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scenario selection for count-based system evaluation"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string config_path, scenarios_path, observations_path, model_path, out_dir;
    std::string objective_text = "sigma";
    double confidence = 0.9, abs_error = 0.1;
    std::uint64_t seed = 0;
    std::size_t runs = 5, workers = 1;
    std::optional<std::size_t> budget;
    std::optional<std::uint64_t> generate_seed;

    auto* gen = app.add_subcommand("generate", "Generate a synthetic scenario space and counts");
    gen->add_option("--config", config_path, "Synthetic config JSON");
    gen->add_option("--out-dir", out_dir, "Output directory")->required();
    gen->add_option("--seed", generate_seed, "Generator seed (overrides config)");

    auto* sel = app.add_subcommand("select", "Greedily select informative scenarios");
    sel->add_option("--scenarios", scenarios_path, "scenarios.csv")->required();
    sel->add_option("--model", model_path, "Model config JSON");
    sel->add_option("--objective", objective_text, "sigma | hyperplane:<level>");
    sel->add_option("--confidence", confidence, "CI confidence for gain estimates");
    sel->add_option("--abs-error", abs_error, "Target CI half-width (nats)");
    sel->add_option("--budget", budget, "Maximum scenarios to select");
    sel->add_option("--seed", seed, "RNG seed");
    sel->add_option("--out", out_dir, "Output directory")->required();
    sel->add_option("--workers", workers, "Worker threads");

    auto* cmp = app.add_subcommand("compare", "Compare greedy vs LHS vs random selection");
    cmp->add_option("--scenarios", scenarios_path, "scenarios.csv")->required();
    cmp->add_option("--model", model_path, "Model config JSON");
    cmp->add_option("--runs", runs, "Runs per method");
    cmp->add_option("--seed", seed, "RNG seed");
    cmp->add_option("--out", out_dir, "Output directory")->required();
    cmp->add_option("--workers", workers, "Worker threads");

    auto* ppc = app.add_subcommand("ppc", "Posterior predictive check of the fitted model");
    ppc->add_option("--scenarios", scenarios_path, "scenarios.csv")->required();
    ppc->add_option("--observations", observations_path, "observations.csv")->required();
    ppc->add_option("--model", model_path, "Model config JSON");
    ppc->add_option("--out", out_dir, "Output directory")->required();
    ppc->add_option("--workers", workers, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed()) return cmd_generate(config_path, out_dir, generate_seed);
        if (sel->parsed())
            return cmd_select(scenarios_path, model_path, objective_text, confidence, abs_error,
                              budget, seed, out_dir, workers);
        if (cmp->parsed())
            return cmd_compare(scenarios_path, model_path, runs, seed, out_dir, workers);
        if (ppc->parsed())
            return cmd_ppc(scenarios_path, observations_path, model_path, out_dir, workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
