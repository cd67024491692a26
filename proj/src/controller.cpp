#include "openloop/controller.hpp"

#include <chrono>
#include <optional>

namespace openloop {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t micros(Clock::duration d) {
    return std::chrono::duration_cast<std::chrono::microseconds>(d).count();
}

void require_live_start(const GenerativeModel& world, const State& s0) {
    if (world.is_terminal(s0)) {
        throw ContractViolation("episode cannot start in a terminal state");
    }
}

}  // namespace

std::string_view to_string(PlanSource source) {
    switch (source) {
        case PlanSource::Initial:
            return "initial";
        case PlanSource::Reused:
            return "reused";
        case PlanSource::Replanned:
            return "replanned";
        case PlanSource::ForcedReplan:
            return "forced-replan";
    }
    return "?";
}

EpisodeRecord run_olta(EpisodeContext& ctx, const State& s0, const CriterionConfig& criterion) {
    require_live_start(ctx.world, s0);
    EpisodeRecord rec;
    const std::uint64_t calls_before = ctx.planner.calls();

    State s = s0;
    std::optional<Tree> tree;
    while (!ctx.world.is_terminal(s)) {
        const auto t0 = Clock::now();
        PlanSource source = PlanSource::Initial;
        VerdictReason verdict = VerdictReason::Kept;
        if (tree) {
            const Verdict v = decide(criterion, *tree, s, ctx.planner);
            verdict = v.reason;
            if (!v.keep) {
                source = PlanSource::Replanned;
            } else if (best_actions(tree->root()).empty()) {
                source = PlanSource::ForcedReplan;
            } else {
                source = PlanSource::Reused;
            }
        }
        if (source != PlanSource::Reused) {
            tree = build_tree(ctx.planner, s, ctx.params, ctx.rollout, ctx.planning_rng);
            ++rec.replans;
            if (source == PlanSource::ForcedReplan) {
                ++rec.forced_replans;
            }
        }
        const Action a = recommended_action(*tree, ctx.planning_rng);
        tree = sub_tree(std::move(*tree), a);
        rec.wall_time_us += micros(Clock::now() - t0);

        TransitionOutcome out = ctx.world.sample(s, a, ctx.world_rng);
        if (ctx.observer) {
            ctx.observer(StepEvent{rec.steps, s, a, source, verdict, out});
        }
        rec.actions.push_back(a);
        ++rec.steps;
        s = std::move(out.next_state);
    }
    rec.loss = static_cast<double>(rec.steps);
    rec.model_calls = ctx.planner.calls() - calls_before;
    return rec;
}

EpisodeRecord run_oluct(EpisodeContext& ctx, const State& s0) {
    require_live_start(ctx.world, s0);
    EpisodeRecord rec;
    const std::uint64_t calls_before = ctx.planner.calls();

    State s = s0;
    while (!ctx.world.is_terminal(s)) {
        const auto t0 = Clock::now();
        const Tree tree = build_tree(ctx.planner, s, ctx.params, ctx.rollout, ctx.planning_rng);
        const Action a = recommended_action(tree, ctx.planning_rng);
        rec.wall_time_us += micros(Clock::now() - t0);
        ++rec.replans;

        TransitionOutcome out = ctx.world.sample(s, a, ctx.world_rng);
        if (ctx.observer) {
            ctx.observer(StepEvent{rec.steps, s, a, rec.steps == 0 ? PlanSource::Initial : PlanSource::Replanned,
                                   VerdictReason::Kept, out});
        }
        rec.actions.push_back(a);
        ++rec.steps;
        s = std::move(out.next_state);
    }
    rec.loss = static_cast<double>(rec.steps);
    rec.model_calls = ctx.planner.calls() - calls_before;
    return rec;
}

}  // namespace openloop
