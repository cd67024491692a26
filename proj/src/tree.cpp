#include "openloop/tree.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace openloop {

bool TreeNode::fully_expanded() const {
    for (const ActionStats& a : actions) {
        if (a.count == 0) {
            return false;
        }
    }
    return true;
}

Tree::Tree(const State& root_state, int num_actions) : num_actions_(num_actions) {
    if (num_actions < 2) {
        throw std::invalid_argument("trees need at least two actions");
    }
    TreeNode root;
    root.sampled_states.push_back(root_state);
    root.actions.resize(static_cast<std::size_t>(num_actions));
    root.children.assign(static_cast<std::size_t>(num_actions), kNoNode);
    nodes_.push_back(std::move(root));
}

NodeId Tree::add_child(NodeId parent, Action a, const State& first_state) {
    const auto slot = static_cast<std::size_t>(a.index);
    if (nodes_.at(parent).children.at(slot) != kNoNode) {
        throw std::logic_error("child already exists");
    }
    TreeNode child;
    child.sampled_states.push_back(first_state);
    child.actions.resize(static_cast<std::size_t>(num_actions_));
    child.children.assign(static_cast<std::size_t>(num_actions_), kNoNode);
    child.depth = nodes_[parent].depth + 1;
    child.stops = 1;
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(child));
    nodes_[parent].children[slot] = id;
    return id;
}

double exploration_bonus(std::uint64_t t, std::uint64_t u, double exploration) {
    return 2.0 * exploration * std::sqrt(std::log(static_cast<double>(t)) / static_cast<double>(u));
}

Action select_action_ucb(const TreeNode& node, double exploration, Rng& rng) {
    std::vector<int> candidates;
    for (std::size_t i = 0; i < node.actions.size(); ++i) {
        if (node.actions[i].count == 0) {
            candidates.push_back(static_cast<int>(i));
        }
    }
    if (candidates.empty()) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < node.actions.size(); ++i) {
            const ActionStats& a = node.actions[i];
            const double score = a.mean() + exploration_bonus(node.visits, a.count, exploration);
            if (score > best) {
                best = score;
                candidates.assign(1, static_cast<int>(i));
            } else if (score == best) {
                candidates.push_back(static_cast<int>(i));
            }
        }
    }
    return Action{candidates[break_tie(candidates.size(), rng)]};
}

double evaluate(GenerativeModel& model, const State& s, const Policy& policy, int horizon, double gamma, Rng& rng) {
    if (horizon < 1) {
        throw std::invalid_argument("rollout horizon must be positive");
    }
    double total = 0.0;
    double discount = 1.0;
    State current = s;
    for (int k = 0; k < horizon && !model.is_terminal(current); ++k) {
        TransitionOutcome out = model.sample(current, policy(current, rng), rng);
        total += discount * out.reward;
        discount *= gamma;
        if (out.terminal) {
            break;
        }
        current = out.next_state;
    }
    return total;
}

void backup(Tree& tree, std::span<const PathStep> path, double leaf_return, double gamma) {
    double g = leaf_return;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        g = it->reward + gamma * g;
        TreeNode& node = tree.node(it->node);
        node.actions[static_cast<std::size_t>(it->action.index)].add(g);
        ++node.visits;
    }
}

Tree build_tree(GenerativeModel& model, const State& s0, const PlannerParams& params, const Policy& rollout,
                Rng& rng) {
    params.validate();
    if (model.is_terminal(s0)) {
        throw ContractViolation("cannot plan from a terminal state");
    }
    Tree tree(s0, model.num_actions());
    tree.budget_ = params.budget;
    const std::uint64_t calls_before = model.calls();

    std::vector<PathStep> path;
    for (std::uint64_t t = 0; t < params.budget; ++t) {
        path.clear();
        NodeId current = tree.root_id();
        State state = s0;
        double leaf_return = 0.0;
        while (true) {
            const Action a = select_action_ucb(tree.node(current), params.exploration, rng);
            TransitionOutcome out = model.sample(state, a, rng);
            path.push_back({current, a, out.reward});
            const NodeId child = tree.node(current).child(a);
            if (child == kNoNode) {
                tree.add_child(current, a, out.next_state);
                if (!out.terminal) {
                    leaf_return = evaluate(model, out.next_state, rollout, params.horizon, params.discount, rng);
                }
                break;
            }
            TreeNode& next = tree.node(child);
            next.sampled_states.push_back(out.next_state);
            if (out.terminal) {
                ++next.stops;
                break;
            }
            current = child;
            state = std::move(out.next_state);
        }
        backup(tree, path, leaf_return, params.discount);
    }
    tree.model_calls_ = model.calls() - calls_before;
    return tree;
}

std::vector<Action> best_actions(const TreeNode& node) {
    std::vector<Action> best;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.actions.size(); ++i) {
        const ActionStats& a = node.actions[i];
        if (a.count == 0) {
            continue;
        }
        const double m = a.mean();
        if (best.empty() || m > best_mean) {
            best_mean = m;
            best.assign(1, Action{static_cast<int>(i)});
        } else if (m == best_mean) {
            best.push_back(Action{static_cast<int>(i)});
        }
    }
    return best;
}

Action recommended_action(const Tree& tree, Rng& rng) {
    const std::vector<Action> best = best_actions(tree.root());
    if (best.empty()) {
        throw std::logic_error("no tried action at the tree root");
    }
    return best[break_tie(best.size(), rng)];
}

Tree sub_tree(Tree&& tree, Action a) {
    if (a.index < 0 || a.index >= tree.num_actions()) {
        throw std::logic_error("sub-tree action out of range");
    }
    const NodeId start = tree.root().child(a);
    if (start == kNoNode) {
        throw std::logic_error("sub-tree requested for an action without a child");
    }

    Tree out;
    out.num_actions_ = tree.num_actions_;
    out.budget_ = tree.root().actions[static_cast<std::size_t>(a.index)].count;
    out.model_calls_ = 0;
    out.root_ = 0;

    // breadth-first copy so the new arena stays compact
    std::deque<std::pair<NodeId, NodeId>> queue;  // (old id, new id)
    out.nodes_.push_back(std::move(tree.nodes_[start]));
    queue.emplace_back(start, 0);
    while (!queue.empty()) {
        const NodeId new_id = queue.front().second;
        queue.pop_front();
        out.nodes_[new_id].depth -= 1;
        for (NodeId& c : out.nodes_[new_id].children) {
            if (c == kNoNode) {
                continue;
            }
            const auto id = static_cast<NodeId>(out.nodes_.size());
            out.nodes_.push_back(std::move(tree.nodes_[c]));
            queue.emplace_back(c, id);
            c = id;
        }
    }
    tree.nodes_.clear();
    return out;
}

nlohmann::json to_json(const Tree& tree) {
    using nlohmann::json;
    json nodes = json::array();
    for (NodeId id = 0; id < tree.size(); ++id) {
        const TreeNode& n = tree.node(id);
        json edges = json::array();
        for (std::size_t i = 0; i < n.actions.size(); ++i) {
            const ActionStats& a = n.actions[i];
            edges.push_back({
                {"action", i},
                {"count", a.count},
                {"mean", a.count > 0 ? json(a.mean()) : json(nullptr)},
                {"child", n.children[i] == kNoNode ? json(nullptr) : json(n.children[i])},
            });
        }
        std::vector<double> mean;
        if (!n.sampled_states.empty()) {
            const std::size_t dims = n.sampled_states.front().dims;
            mean.assign(dims, 0.0);
            for (const State& s : n.sampled_states) {
                for (std::size_t k = 0; k < dims; ++k) {
                    mean[k] += s.x[k];
                }
            }
            for (double& m : mean) {
                m /= static_cast<double>(n.sampled_states.size());
            }
        }
        nodes.push_back({
            {"id", id},
            {"depth", n.depth},
            {"visits", n.visits},
            {"stops", n.stops},
            {"sampled_states", n.sampled_states.size()},
            {"state_mean", mean},
            {"actions", edges},
        });
    }
    return {{"root", tree.root_id()}, {"budget", tree.budget()}, {"model_calls", tree.model_calls()},
            {"nodes", nodes}};
}

}  // namespace openloop
