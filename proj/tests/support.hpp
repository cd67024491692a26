#pragma once

#include "openloop/environments.hpp"
#include "openloop/harness.hpp"
#include "openloop/mdp.hpp"
#include "openloop/tree.hpp"

#include <cmath>
#include <filesystem>
#include <vector>

namespace openloop::testing {

inline std::filesystem::path data_path(const std::string& rel) {
    return std::filesystem::path(OPENLOOP_DATA_DIR) / rel;
}

inline PtspMap continuous_map() {
    return load_ptsp_map(data_path("maps/ptsp-continuous.json"));
}

inline PtspMap discrete_map() {
    return load_ptsp_map(data_path("maps/ptsp-discrete.json"));
}

/// Scalar continuous state.
inline State scalar(double v) {
    const double f[1] = {v};
    return State::continuous(f);
}

inline State point(double a, double b) {
    const double f[2] = {a, b};
    return State::continuous(f);
}

inline State labelled(std::int64_t id) {
    const double f[1] = {static_cast<double>(id)};
    return State::discrete(id, f);
}

/// Tree whose root holds `states` and whose root actions carry `returns`
/// (one list per action, empty for an untried action).
inline Tree tree_with(const std::vector<State>& states, const std::vector<std::vector<double>>& returns) {
    Tree t(states.front(), static_cast<int>(returns.size()));
    TreeNode& root = t.node(t.root_id());
    root.sampled_states = states;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        for (double g : returns[i]) {
            root.actions[i].add(g);
            ++root.visits;
        }
    }
    return t;
}

/// Minimum expected number of steps to reach either end of the discrete
/// track, by value iteration on the five-cell chain.
inline std::array<double, 5> track_expected_steps(double q) {
    std::array<double, 5> v{};
    for (int it = 0; it < 100000; ++it) {
        std::array<double, 5> next = v;
        for (int s = 1; s <= 3; ++s) {
            const double right = 1.0 + (1.0 - q) * v[s + 1] + q * v[s - 1];
            const double left = 1.0 + (1.0 - q) * v[s - 1] + q * v[s + 1];
            next[s] = std::min(right, left);
        }
        double diff = 0.0;
        for (int s = 0; s < 5; ++s) {
            diff = std::max(diff, std::abs(next[s] - v[s]));
        }
        v = next;
        if (diff < 1e-13) {
            break;
        }
    }
    return v;
}

}  // namespace openloop::testing
