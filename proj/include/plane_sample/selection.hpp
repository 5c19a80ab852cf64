#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plane_sample/exact_gain.hpp"
#include "plane_sample/inference.hpp"
#include "plane_sample/rng.hpp"
#include "plane_sample/scenario_space.hpp"

namespace ps {

// What the selection maximizes information about: the hyperparameter sigma, or
// the rate of one hyperplane level.
struct Objective {
    enum class Kind { sigma, hyperplane };
    Kind kind = Kind::sigma;
    std::uint32_t level = 0;  // used when kind == hyperplane
};

enum class StopReason { plateau, budget, exhausted };
std::string to_string(StopReason r);

struct TraceStep {
    std::uint32_t step = 0;       // 1-based
    ScenarioId scenario_id = 0;
    GainEstimate gain;            // cumulative gain of the set after this step
    double marginal = 0.0;        // gain.mean minus previous step's mean
};

struct SelectionTrace {
    std::vector<TraceStep> steps;
    StopReason stopped_reason = StopReason::exhausted;
    std::optional<std::size_t> budget;

    std::vector<ScenarioId> selected() const;
};

// Plateau test: continue iff the one-sided lower confidence bound on the gain
// increase is positive, i.e. (curr - prev) - z*sqrt(se_prev^2 + se_curr^2) > 0
// with se = ci_halfwidth / z. Exact estimates (ci 0) reduce to curr > prev.
bool stopping_test(const GainEstimate& prev, const GainEstimate& curr, double confidence);

// Gain of a candidate set under a fixed per-step seed. All candidates within
// one greedy step are evaluated with the same seed (common random numbers).
class GainOracle {
  public:
    virtual ~GainOracle() = default;
    virtual GainEstimate evaluate(std::span<const ScenarioId> ids, std::uint64_t seed) const = 0;
};

class McGainOracle final : public GainOracle {
  public:
    McGainOracle(const GainEngine& engine, McOptions opts, Objective objective = {})
        : engine_(engine), opts_(opts), objective_(objective) {}
    GainEstimate evaluate(std::span<const ScenarioId> ids, std::uint64_t seed) const override;

  private:
    const GainEngine& engine_;
    McOptions opts_;
    Objective objective_;
};

class ExactGainOracle final : public GainOracle {
  public:
    ExactGainOracle(const exact::ExactModel& model, Objective objective = {})
        : model_(model), objective_(objective) {}
    GainEstimate evaluate(std::span<const ScenarioId> ids, std::uint64_t seed) const override;

  private:
    const exact::ExactModel& model_;
    Objective objective_;
};

struct SelectionOptions {
    std::optional<std::size_t> budget;
    double confidence = 0.90;     // for the stopping test
    bool stop_on_plateau = true;  // off: run to budget/exhaustion, annotate later
    std::size_t workers = 1;      // parallelism across candidate evaluations
};

// Greedy maximization: each step evaluates every remaining scenario appended
// to the current set, adds the argmax (ties: smallest id), and stops when the
// best candidate's increase fails stopping_test, the budget is reached, or the
// space is exhausted. A failing candidate is not added.
SelectionTrace greedy_select(const GainOracle& oracle, const ScenarioSpace& space,
                             const SelectionOptions& opts, Rng& rng);

// Convenience form wiring the MC oracle with the standard estimator settings.
SelectionTrace greedy_select(const ScenarioSpace& space, const HierModel& model,
                             const Objective& objective, double confidence, double abs_error,
                             Rng& rng, std::optional<std::size_t> budget = std::nullopt,
                             std::size_t workers = 1);

// Number of steps retained when the plateau rule is applied to an existing
// trace: index of the first step whose increase is insignificant.
std::size_t annotate_stop(const SelectionTrace& trace, double confidence);

// Latin-hypercube-style draw adapted to categorical coordinates: per feature,
// `budget` equal strata over the level axis are used exactly once each (in a
// random permutation); each drawn tuple maps to the nearest not-yet-selected
// scenario by L1 distance on level indices (ties: smallest id). Returns ids in
// draw order.
std::vector<ScenarioId> lhs_select(const ScenarioSpace& space, std::size_t budget, Rng& rng);

// Uniform without replacement, draw order preserved.
std::vector<ScenarioId> random_select(const ScenarioSpace& space, std::size_t budget, Rng& rng);

struct BruteForceResult {
    std::vector<ScenarioId> ids;
    double gain = 0.0;
};

// Exhaustive maximization of the exact gain over all size-`budget` subsets.
// Refuses instances with more than 1e5 subsets (and inherits the exact model's
// enumeration guard). Ties resolve to the lexicographically smallest id set.
BruteForceResult brute_force_optimal(const ScenarioSpace& space, const HierModel& model,
                                     std::size_t budget);

std::string selection_trace_to_json(const SelectionTrace& trace);
std::string gain_curve_csv(const SelectionTrace& trace);

}  // namespace ps
