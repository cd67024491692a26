#pragma once

#include "openloop/criteria.hpp"
#include "openloop/mdp.hpp"
#include "openloop/tree.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace openloop {

struct EpisodeRecord {
    double loss = 0.0;                 // steps to termination
    std::uint64_t model_calls = 0;     // planning calls only
    std::int64_t wall_time_us = 0;     // planning + criterion time
    std::uint64_t replans = 0;         // tree builds, the initial one included
    std::uint64_t forced_replans = 0;  // kept trees whose root had nothing to recommend
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
    std::vector<Action> actions;
};

enum class PlanSource {
    Initial,      // first tree of the episode
    Reused,       // criterion kept the sub-tree
    Replanned,    // criterion discarded the sub-tree
    ForcedReplan, // criterion kept it but the root had no tried action
};

std::string_view to_string(PlanSource source);

/// One executed step, reported to the optional observer.
struct StepEvent {
    std::uint64_t step = 0;
    State state;  // state the action was chosen in
    Action action;
    PlanSource source = PlanSource::Initial;
    VerdictReason verdict = VerdictReason::Kept;
    TransitionOutcome outcome;
};

using StepObserver = std::function<void(const StepEvent&)>;

/// Everything an episode needs besides its start state. `planner` is the
/// generative model used for tree building; `world` produces the real
/// transitions and is never charged to `model_calls`.
struct EpisodeContext {
    GenerativeModel& planner;
    GenerativeModel& world;
    const Policy& rollout;
    PlannerParams params;
    Rng& planning_rng;
    Rng& world_rng;
    StepObserver observer = {};
};

/// Tree-reuse controller: keeps following the sub-tree under the applied
/// action while `criterion` accepts it, and rebuilds from the current state
/// otherwise. A freshly built tree is used directly without consulting the
/// criterion.
EpisodeRecord run_olta(EpisodeContext& ctx, const State& s0, const CriterionConfig& criterion);

/// Baseline: a fresh tree at every step.
EpisodeRecord run_oluct(EpisodeContext& ctx, const State& s0);

}  // namespace openloop
