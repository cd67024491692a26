#include "openloop/mdp.hpp"

#include <algorithm>
#include <cmath>

namespace openloop {

State State::discrete(std::int64_t id, std::span<const double> features) {
    State s = continuous(features);
    s.id = id;
    return s;
}

State State::continuous(std::span<const double> features) {
    if (features.size() > kMaxStateDims) {
        throw std::invalid_argument("state has more than " + std::to_string(kMaxStateDims) + " features");
    }
    State s;
    std::copy(features.begin(), features.end(), s.x.begin());
    s.dims = static_cast<std::uint8_t>(features.size());
    return s;
}

bool same_discrete_state(const State& a, const State& b) {
    return a.id.has_value() && a.id == b.id && a.visited == b.visited;
}

void PlannerParams::validate() const {
    if (budget < 1) {
        throw std::invalid_argument("planner budget must be positive");
    }
    if (!(exploration >= 0.0)) {
        throw std::invalid_argument("exploration constant must be non-negative");
    }
    if (!(discount >= 0.0 && discount < 1.0)) {
        throw std::invalid_argument("discount must lie in [0, 1)");
    }
    if (horizon < 1) {
        throw std::invalid_argument("rollout horizon must be positive");
    }
}

bool GenerativeModel::action_available(const State&, Action) const {
    return true;
}

TransitionOutcome GenerativeModel::sample(const State& s, Action a, Rng& rng) {
    if (a.index < 0 || a.index >= num_actions()) {
        throw ContractViolation("action index " + std::to_string(a.index) + " out of range");
    }
    if (is_terminal(s)) {
        throw ContractViolation("cannot step from a terminal state");
    }
    ++calls_;
    return step(s, a, rng);
}

double discounted_return(std::span<const double> rewards, double gamma) {
    double g = 0.0;
    for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) {
        g = *it + gamma * g;
    }
    return g;
}

std::size_t break_tie(std::size_t count, Rng& rng) {
    if (count <= 1) {
        return 0;
    }
    return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

}  // namespace openloop
