#pragma once

#include "openloop/mdp.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace openloop {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Statistics of one action (edge) at a node.
struct ActionStats {
    std::uint64_t count = 0;
    double value_sum = 0.0;
    std::vector<double> returns;  // every backed-up return, in order

    double mean() const { return value_sum / static_cast<double>(count); }
    void add(double g) {
        ++count;
        value_sum += g;
        returns.push_back(g);
    }
};

/// Open-loop node: a set of sampled states reached by one action sequence.
///
/// Accounting, exact at every node:
///   visits == sum of actions[i].count
///   sampled_states.size() == visits + stops        (non-root nodes)
///   parent edge count     == sampled_states.size() (non-root nodes)
/// where `stops` counts the descents that ended at this node, either because
/// the node was just created or because the freshly sampled state was terminal.
struct TreeNode {
    std::vector<State> sampled_states;
    std::vector<ActionStats> actions;
    std::vector<NodeId> children;
    int depth = 0;
    std::uint64_t visits = 0;
    std::uint64_t stops = 0;

    bool fully_expanded() const;
    bool tried(Action a) const { return actions[static_cast<std::size_t>(a.index)].count > 0; }
    NodeId child(Action a) const { return children[static_cast<std::size_t>(a.index)]; }
};

/// Arena-backed open-loop tree.
class Tree {
public:
    Tree(const State& root_state, int num_actions);

    NodeId root_id() const { return root_; }
    const TreeNode& root() const { return nodes_[root_]; }
    const TreeNode& node(NodeId id) const { return nodes_.at(id); }
    TreeNode& node(NodeId id) { return nodes_.at(id); }
    std::size_t size() const { return nodes_.size(); }
    int num_actions() const { return num_actions_; }

    /// Budget b(d) spent developing this tree: n for a freshly built tree, the
    /// parent edge count for an extracted sub-tree.
    std::uint64_t budget() const { return budget_; }

    /// Generative-model calls made while building this tree.
    std::uint64_t model_calls() const { return model_calls_; }

    NodeId add_child(NodeId parent, Action a, const State& first_state);

private:
    friend Tree build_tree(GenerativeModel&, const State&, const PlannerParams&, const Policy&, Rng&);
    friend Tree sub_tree(Tree&&, Action);

    Tree() = default;

    std::vector<TreeNode> nodes_;
    NodeId root_ = 0;
    int num_actions_ = 0;
    std::uint64_t budget_ = 0;
    std::uint64_t model_calls_ = 0;
};

/// 2 * C_p * sqrt(ln(t) / u).
double exploration_bonus(std::uint64_t t, std::uint64_t u, double exploration);

/// UCB1 tree policy. Untried actions come first (uniformly among them);
/// otherwise argmax of mean + bonus, ties broken uniformly.
Action select_action_ucb(const TreeNode& node, double exploration, Rng& rng);

/// Default-policy rollout of at most `horizon` steps; discounted reward sum.
double evaluate(GenerativeModel& model, const State& s, const Policy& policy, int horizon, double gamma, Rng& rng);

struct PathStep {
    NodeId node = kNoNode;
    Action action;
    double reward = 0.0;
};

/// Walks `path` leaf to root with G <- r + gamma * G, starting from
/// `leaf_return`, and records G on every traversed edge.
void backup(Tree& tree, std::span<const PathStep> path, double leaf_return, double gamma);

/// Builds an open-loop UCT tree rooted at `s0` with exactly `params.budget`
/// select / expand / evaluate / backup iterations.
Tree build_tree(GenerativeModel& model, const State& s0, const PlannerParams& params, const Policy& rollout,
                Rng& rng);

/// Tried root actions with the highest mean return.
std::vector<Action> best_actions(const TreeNode& node);

/// Argmax of mean return at the root over tried actions, ties uniform.
/// Throws std::logic_error when no root action has been tried.
Action recommended_action(const Tree& tree, Rng& rng);

/// Re-roots the tree at the child reached by `a`. Statistics and sampled
/// states are preserved and depths shift by -1. Throws std::logic_error if the
/// child does not exist.
Tree sub_tree(Tree&& tree, Action a);

/// Debug dump: per node depth, visits, sampled-state summary and edge stats.
nlohmann::json to_json(const Tree& tree);

}  // namespace openloop
