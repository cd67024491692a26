#include "support.hpp"

#include "openloop/bounds.hpp"

#include <doctest.h>

#include <functional>
#include <limits>

using namespace openloop;
using namespace openloop::testing;

namespace {

// Brute-force UCB1: every index maximizing mean + 2 C_p sqrt(ln t / u), or
// every untried index when there is one.
std::vector<int> ucb_oracle(const TreeNode& node, double cp) {
    std::vector<int> untried;
    for (std::size_t i = 0; i < node.actions.size(); ++i) {
        if (node.actions[i].count == 0) {
            untried.push_back(static_cast<int>(i));
        }
    }
    if (!untried.empty()) {
        return untried;
    }
    std::uint64_t t = 0;
    for (const ActionStats& a : node.actions) {
        t += a.count;
    }
    std::vector<double> score;
    for (const ActionStats& a : node.actions) {
        double sum = 0.0;
        for (double g : a.returns) {
            sum += g;
        }
        const double u = static_cast<double>(a.returns.size());
        score.push_back(sum / u + 2.0 * cp * std::sqrt(std::log(static_cast<double>(t)) / u));
    }
    const double best = *std::max_element(score.begin(), score.end());
    std::vector<int> arg;
    for (std::size_t i = 0; i < score.size(); ++i) {
        if (score[i] == best) {
            arg.push_back(static_cast<int>(i));
        }
    }
    return arg;
}

void check_accounting(const Tree& tree, std::uint64_t budget) {
    CHECK(tree.root().visits == budget);
    for (NodeId id = 0; id < tree.size(); ++id) {
        const TreeNode& n = tree.node(id);
        std::uint64_t sum = 0;
        for (const ActionStats& a : n.actions) {
            sum += a.count;
            CHECK(a.returns.size() == a.count);
            if (a.count > 0) {
                double mean = 0.0;
                for (double g : a.returns) {
                    mean += g;
                }
                CHECK(a.mean() == doctest::Approx(mean / a.count).epsilon(1e-12));
            }
        }
        CHECK(n.visits == sum);
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (n.children[i] == kNoNode) {
                CHECK(n.actions[i].count == 0);
                continue;
            }
            const TreeNode& c = tree.node(n.children[i]);
            CHECK(c.sampled_states.size() == c.visits + c.stops);
            CHECK(c.sampled_states.size() == n.actions[i].count);
            CHECK(c.depth == n.depth + 1);
        }
    }
}

}  // namespace

TEST_CASE("exploration bonus") {
    CHECK(exploration_bonus(10, 2, 0.7) == doctest::Approx(1.4 * std::sqrt(std::log(10.0) / 2.0)));
    CHECK(exploration_bonus(1, 1, 0.7) == 0.0);
}

TEST_CASE("select_action_ucb matches a brute-force argmax") {
    Rng rng(2024);
    for (int trial = 0; trial < 10000; ++trial) {
        const int k = 2 + trial % 4;
        TreeNode node;
        node.actions.resize(static_cast<std::size_t>(k));
        for (auto& a : node.actions) {
            const int u = std::uniform_int_distribution<int>(trial % 7 == 0 ? 0 : 1, 6)(rng);
            for (int j = 0; j < u; ++j) {
                // coarse values so exact ties happen
                a.add(std::uniform_int_distribution<int>(0, 4)(rng) / 4.0);
            }
            node.visits += a.count;
        }
        const double cp = trial % 3 == 0 ? 0.0 : 0.7;
        const auto oracle = ucb_oracle(node, cp);
        const Action got = select_action_ucb(node, cp, rng);
        CHECK(std::find(oracle.begin(), oracle.end(), got.index) != oracle.end());
    }
}

TEST_CASE("ties in UCB are broken uniformly") {
    TreeNode node;
    node.actions.resize(3);
    for (auto& a : node.actions) {
        a.add(0.5);
        ++node.visits;
    }
    Rng rng(1);
    std::array<int, 3> freq{};
    for (int i = 0; i < 30000; ++i) {
        ++freq[static_cast<std::size_t>(select_action_ucb(node, 0.7, rng).index)];
    }
    for (int f : freq) {
        CHECK(std::abs(f - 10000) < 3 * std::sqrt(30000 * 2.0 / 9.0));
    }
}

TEST_CASE("root selections follow the UCB recurrence over 50 iterations") {
    // two-arm, depth-one MDP; a prefix of a build with the same seed replays
    // the same iterations, so tree(t + 1) differs from tree(t) by one pull
    BernoulliBandit bandit(0.27);
    const Policy none = [](const State&, Rng&) { return Action{0}; };
    const PlannerParams base{1, 0.7, 0.9, 1};
    for (std::uint64_t t = 1; t < 50; ++t) {
        PlannerParams p = base;
        p.budget = t;
        Rng r1(77);
        const Tree before = build_tree(bandit, bandit.initial_state(), p, none, r1);
        p.budget = t + 1;
        Rng r2(77);
        const Tree after = build_tree(bandit, bandit.initial_state(), p, none, r2);
        int pulled = -1;
        for (int i = 0; i < 2; ++i) {
            const auto& b = before.root().actions[static_cast<std::size_t>(i)];
            const auto& a = after.root().actions[static_cast<std::size_t>(i)];
            if (a.count == b.count + 1) {
                pulled = i;
                CHECK(std::equal(b.returns.begin(), b.returns.end(), a.returns.begin()));
            } else {
                CHECK(a.count == b.count);
            }
        }
        REQUIRE(pulled >= 0);
        const auto oracle = ucb_oracle(before.root(), 0.7);
        CHECK(std::find(oracle.begin(), oracle.end(), pulled) != oracle.end());
    }
}

TEST_CASE("backup applies G = r + gamma G along the path") {
    Tree tree(DiscreteTrack1D::state(2), 2);
    const NodeId c1 = tree.add_child(tree.root_id(), Action{0}, DiscreteTrack1D::state(3));
    tree.add_child(c1, Action{1}, DiscreteTrack1D::state(2));
    const std::vector<PathStep> path{{tree.root_id(), Action{0}, 0.0}, {c1, Action{1}, 0.0}};
    backup(tree, path, 1.0, 0.9);
    CHECK(tree.root().actions[0].mean() == doctest::Approx(0.81).epsilon(1e-12));
    CHECK(tree.node(c1).actions[1].mean() == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(tree.root().visits == 1);

    const std::vector<PathStep> rewarded{{tree.root_id(), Action{1}, 1.0}};
    backup(tree, rewarded, 0.5, 0.9);
    CHECK(tree.root().actions[1].returns.back() == doctest::Approx(1.45));
}

TEST_CASE("build_tree accounting identities") {
    SUBCASE("discrete track") {
        DiscreteTrack1D track(0.2);
        Rng rng(3);
        const PlannerParams p{20, 0.7, 0.9, 10};
        const Tree tree = build_tree(track, track.initial_state(), p, track1d_discrete_optimal_policy(), rng);
        check_accounting(tree, 20);
        CHECK(tree.model_calls() == track.calls());
        CHECK(tree.budget() == 20);
        CHECK(tree.model_calls() >= 20);
    }
    SUBCASE("continuous PTSP") {
        ContinuousPtsp ptsp(continuous_map(), {0.25, 0.02, 0.3});
        Rng rng(3);
        const PlannerParams p{200, 0.7, 0.99, 20};
        const Tree tree = build_tree(ptsp, ptsp.initial_state(), p, ptsp_continuous_go_straight_policy(), rng);
        check_accounting(tree, 200);
        CHECK(tree.model_calls() == ptsp.calls());
    }
    SUBCASE("discrete PTSP") {
        DiscretePtsp grid(discrete_map(), 0.1);
        Rng rng(3);
        const PlannerParams p{150, 0.7, 0.99, 20};
        const Tree tree = build_tree(grid, grid.initial_state(), p, ptsp_discrete_go_straight_policy(), rng);
        check_accounting(tree, 150);
    }
}

TEST_CASE("build_tree is reproducible and rejects terminal roots") {
    DiscreteTrack1D track(0.3);
    const PlannerParams p{40, 0.7, 0.9, 10};
    Rng a(5);
    Rng b(5);
    const Tree t1 = build_tree(track, track.initial_state(), p, track1d_discrete_optimal_policy(), a);
    const Tree t2 = build_tree(track, track.initial_state(), p, track1d_discrete_optimal_policy(), b);
    CHECK(to_json(t1) == to_json(t2));
    CHECK_THROWS_AS(build_tree(track, DiscreteTrack1D::state(4), p, track1d_discrete_optimal_policy(), a),
                    ContractViolation);
}

TEST_CASE("recommended_action picks the best tried mean") {
    Rng rng(1);
    const Tree t = tree_with({labelled(0)}, {{0.1, 0.2}, {0.9}, {}});
    CHECK(recommended_action(t, rng).index == 1);
    const Tree empty = tree_with({labelled(0)}, {{}, {}});
    CHECK_THROWS_AS(recommended_action(empty, rng), std::logic_error);
    const Tree tied = tree_with({labelled(0)}, {{0.5}, {0.5}});
    std::array<int, 2> freq{};
    for (int i = 0; i < 2000; ++i) {
        ++freq[static_cast<std::size_t>(recommended_action(tied, rng).index)];
    }
    CHECK(freq[0] > 850);
    CHECK(freq[1] > 850);
}

TEST_CASE("sub_tree preserves statistics and shifts depths") {
    DiscreteTrack1D track(0.2);
    Rng rng(9);
    const PlannerParams p{60, 0.7, 0.9, 10};
    Tree tree = build_tree(track, track.initial_state(), p, track1d_discrete_optimal_policy(), rng);
    const Action a{0};
    const NodeId child = tree.root().child(a);
    REQUIRE(child != kNoNode);
    const TreeNode copy = tree.node(child);
    const std::uint64_t edge = tree.root().actions[0].count;

    // snapshot of the whole subtree in BFS order
    std::vector<TreeNode> expected;
    std::vector<NodeId> frontier{child};
    while (!frontier.empty()) {
        std::vector<NodeId> next;
        for (NodeId id : frontier) {
            expected.push_back(tree.node(id));
            for (NodeId c : tree.node(id).children) {
                if (c != kNoNode) {
                    next.push_back(c);
                }
            }
        }
        frontier = next;
    }

    const Tree sub = sub_tree(std::move(tree), a);
    CHECK(sub.budget() == edge);
    CHECK(sub.root().sampled_states.size() == edge);
    CHECK(sub.root().visits == copy.visits);
    CHECK(sub.root().depth == 0);
    REQUIRE(sub.size() == expected.size());
    for (NodeId id = 0; id < sub.size(); ++id) {
        const TreeNode& got = sub.node(id);
        const TreeNode& want = expected[id];
        CHECK(got.depth == want.depth - 1);
        CHECK(got.visits == want.visits);
        CHECK(got.stops == want.stops);
        CHECK(got.sampled_states.size() == want.sampled_states.size());
        for (std::size_t i = 0; i < got.actions.size(); ++i) {
            CHECK(got.actions[i].count == want.actions[i].count);
            CHECK(got.actions[i].returns == want.actions[i].returns);
            CHECK(got.actions[i].value_sum == want.actions[i].value_sum);
        }
    }
}

TEST_CASE("sub_tree without a child is an error") {
    Tree t(labelled(0), 2);
    CHECK_THROWS_AS(sub_tree(std::move(t), Action{1}), std::logic_error);
    Tree u(labelled(0), 2);
    CHECK_THROWS_AS(sub_tree(std::move(u), Action{5}), std::logic_error);
}

TEST_CASE("tree json dump") {
    DiscreteTrack1D track(0.0);
    Rng rng(1);
    const Tree tree = build_tree(track, track.initial_state(), {20, 0.7, 0.9, 10}, track1d_discrete_optimal_policy(), rng);
    const auto j = to_json(tree);
    CHECK(j["nodes"].size() == tree.size());
    CHECK(j["nodes"][0]["visits"] == 20);
    CHECK(j["budget"] == 20);
    CHECK(j["nodes"][0]["state_mean"][0] == 2.0);
}
