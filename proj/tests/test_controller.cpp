#include "support.hpp"

#include "openloop/controller.hpp"

#include <doctest.h>

using namespace openloop;
using namespace openloop::testing;

namespace {

struct Episode {
    std::unique_ptr<GenerativeModel> planner;
    std::unique_ptr<GenerativeModel> world;
    Policy rollout;
    PlannerParams params;
    Rng planning_rng;
    Rng world_rng;

    Episode(EnvironmentInstance env, PlannerParams p, std::uint64_t plan_seed, std::uint64_t world_seed)
        : planner(std::move(env.model)),
          world(planner->clone()),
          rollout(std::move(env.rollout)),
          params(p),
          planning_rng(plan_seed),
          world_rng(world_seed) {}

    EpisodeContext context() { return {*planner, *world, rollout, params, planning_rng, world_rng, {}}; }
};

EnvironmentInstance track(double q) {
    return {std::make_unique<DiscreteTrack1D>(q), track1d_discrete_optimal_policy()};
}

const PlannerParams kTrackParams{20, 0.7, 0.9, 10};

CriterionConfig kind(CriterionKind k) {
    CriterionConfig c;
    c.kind = k;
    return c;
}

}  // namespace

TEST_CASE("OLUCT on the deterministic track") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Episode ep(track(0.0), kTrackParams, seed, seed + 1000);
        auto ctx = ep.context();
        const EpisodeRecord rec = run_oluct(ctx, ep.planner->initial_state());
        CHECK(rec.loss == 2.0);
        CHECK(rec.steps == 2);
        CHECK(rec.replans == 2);
        CHECK(rec.model_calls >= 2 * kTrackParams.budget);
        CHECK(rec.actions.size() == 2);
    }
}

TEST_CASE("Plain OLTA on the deterministic track") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Episode ep(track(0.0), kTrackParams, seed, seed + 1000);
        auto ctx = ep.context();
        const EpisodeRecord rec = run_olta(ctx, ep.planner->initial_state(), kind(CriterionKind::Plain));
        CHECK(rec.loss == 2.0);
        CHECK(rec.replans <= 2);
        CHECK(rec.replans >= 1);
    }
}

TEST_CASE("terminal start states are rejected") {
    Episode ep(track(0.0), kTrackParams, 1, 2);
    auto ctx = ep.context();
    CHECK_THROWS_AS(run_oluct(ctx, DiscreteTrack1D::state(0)), ContractViolation);
    CHECK_THROWS_AS(run_olta(ctx, DiscreteTrack1D::state(4), kind(CriterionKind::Plain)), ContractViolation);
}

TEST_CASE("always-discard OLTA is OLUCT under shared streams") {
    for (double q : {0.0, 0.2, 0.5}) {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            Episode a(track(q), kTrackParams, seed, seed + 77);
            Episode b(track(q), kTrackParams, seed, seed + 77);
            auto ca = a.context();
            auto cb = b.context();
            const EpisodeRecord oluct = run_oluct(ca, a.planner->initial_state());
            const EpisodeRecord olta = run_olta(cb, b.planner->initial_state(), kind(CriterionKind::AlwaysDiscard));
            CHECK(olta.actions == oluct.actions);
            CHECK(olta.loss == oluct.loss);
            CHECK(olta.model_calls == oluct.model_calls);
            CHECK(olta.replans == oluct.replans);
        }
    }
}

TEST_CASE("always-keep builds once until the tree runs dry") {
    DiscretePtsp grid(discrete_map(), 0.0);
    Episode ep({std::make_unique<DiscretePtsp>(grid), ptsp_discrete_go_straight_policy()}, {400, 0.7, 0.99, 20}, 4, 5);
    auto ctx = ep.context();
    std::vector<PlanSource> sources;
    ctx.observer = [&](const StepEvent& e) { sources.push_back(e.source); };
    const EpisodeRecord rec = run_olta(ctx, ep.planner->initial_state(), kind(CriterionKind::AlwaysKeep));
    CHECK(rec.replans == 1 + rec.forced_replans);
    REQUIRE_FALSE(sources.empty());
    CHECK(sources.front() == PlanSource::Initial);
    // the first tree serves at least its first two steps
    REQUIRE(sources.size() >= 2);
    CHECK(sources[1] == PlanSource::Reused);
}

TEST_CASE("real transitions are not charged to the planner") {
    Episode ep(track(0.3), kTrackParams, 8, 9);
    auto ctx = ep.context();
    const EpisodeRecord rec = run_olta(ctx, ep.planner->initial_state(), kind(CriterionKind::SDV));
    CHECK(ep.world->calls() == rec.steps);
    CHECK(ep.planner->calls() == rec.model_calls);
}

TEST_CASE("episode record invariants") {
    for (CriterionKind k : {CriterionKind::Plain, CriterionKind::SDM, CriterionKind::SDV, CriterionKind::SDSD,
                            CriterionKind::RDV}) {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            Episode ep(track(0.35), kTrackParams, seed, seed * 3 + 1);
            auto ctx = ep.context();
            std::uint64_t events = 0;
            ctx.observer = [&](const StepEvent& e) {
                CHECK(e.step == events);
                ++events;
            };
            const EpisodeRecord rec = run_olta(ctx, ep.planner->initial_state(), kind(k));
            CHECK(rec.replans <= rec.steps + 1);
            CHECK(rec.replans >= 1);
            CHECK(rec.model_calls >= rec.replans);
            CHECK(rec.model_calls >= rec.replans * kTrackParams.budget);
            CHECK(events == rec.steps);
            CHECK(rec.loss == static_cast<double>(rec.steps));
            CHECK(rec.wall_time_us >= 0);
        }
    }
}

TEST_CASE("Plain OLTA uses fewer calls than OLUCT on paired deterministic episodes") {
    int strictly_fewer = 0;
    for (std::uint64_t ep_index = 0; ep_index < 100; ++ep_index) {
        Episode a(track(0.0), kTrackParams, ep_index, 500 + ep_index);
        Episode b(track(0.0), kTrackParams, ep_index + 10000, 500 + ep_index);
        auto ca = a.context();
        auto cb = b.context();
        const auto oluct = run_oluct(ca, a.planner->initial_state());
        const auto olta = run_olta(cb, b.planner->initial_state(), kind(CriterionKind::Plain));
        strictly_fewer += olta.model_calls < oluct.model_calls ? 1 : 0;
    }
    CHECK(strictly_fewer >= 95);
}

TEST_CASE("OLTA on every environment terminates and keeps its books") {
    ExperimentConfig cfg;
    for (const char* preset : {"configs/track1d-continuous.json", "configs/ptsp-continuous.json",
                               "configs/ptsp-discrete.json"}) {
        cfg = load_experiment_config(data_path(preset));
        EnvironmentInstance env = make_environment(cfg.environment, 0.2);
        PlannerParams p = cfg.planner;
        p.budget = 40;
        Episode ep(std::move(env), p, 1, 2);
        auto ctx = ep.context();
        const EpisodeRecord rec = run_olta(ctx, ep.planner->initial_state(), kind(CriterionKind::SDSD));
        CHECK(rec.steps > 0);
        CHECK(rec.replans <= rec.steps);
        CHECK(ep.world->is_terminal(ep.world->initial_state()) == false);
    }
}
