#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace openloop {

/// Random stream threaded explicitly through every stochastic operation.
using Rng = std::mt19937_64;

/// Raised when an operation is called outside its documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline constexpr std::size_t kMaxStateDims = 4;

/// A sampled environment state.
///
/// Every state carries a small feature vector used by the state-distribution
/// statistics. Discrete state spaces additionally set `id`, which is the
/// identity used for exact-equality comparisons (mode grouping). `visited`
/// and `tick` are environment bookkeeping (waypoint mask and elapsed steps).
struct State {
    std::array<double, kMaxStateDims> x{};
    std::uint8_t dims = 0;
    std::optional<std::int64_t> id;
    std::uint32_t visited = 0;
    std::int32_t tick = 0;

    static State discrete(std::int64_t id, std::span<const double> features);
    static State continuous(std::span<const double> features);

    std::span<const double> features() const { return {x.data(), dims}; }
    bool is_discrete() const { return id.has_value(); }
};

/// Exact identity for discrete states (identifier and waypoint mask).
bool same_discrete_state(const State& a, const State& b);

struct Action {
    int index = 0;
    friend bool operator==(Action, Action) = default;
};

struct TransitionOutcome {
    State next_state;
    double reward = 0.0;
    bool terminal = false;
};

struct PlannerParams {
    std::uint64_t budget = 20;   // n, tree-building iterations
    double exploration = 0.7;    // C_p
    double discount = 0.9;       // gamma in [0, 1)
    int horizon = 10;            // rollout horizon H

    void validate() const;
};

/// Default (rollout) policy.
using Policy = std::function<Action(const State&, Rng&)>;

/// Sampling access to an MDP. Planners and controllers only ever touch an
/// environment through this interface; every call to `sample` is counted.
class GenerativeModel {
public:
    virtual ~GenerativeModel() = default;

    virtual std::string_view name() const = 0;
    virtual int num_actions() const = 0;
    virtual bool is_terminal(const State& s) const = 0;
    virtual State initial_state() const = 0;
    virtual bool discrete_states() const = 0;
    virtual std::unique_ptr<GenerativeModel> clone() const = 0;

    /// Whether `a` is a meaningful move from `s`. Environments with blocked
    /// moves (grid walls) override this; criteria consult it.
    virtual bool action_available(const State& s, Action a) const;

    /// Draws one transition. Throws ContractViolation on a terminal `s` or an
    /// out-of-range action. Increments the call counter by exactly one.
    TransitionOutcome sample(const State& s, Action a, Rng& rng);

    std::uint64_t calls() const { return calls_; }
    void reset_calls() { calls_ = 0; }

protected:
    GenerativeModel() = default;
    GenerativeModel(const GenerativeModel&) = default;
    GenerativeModel& operator=(const GenerativeModel&) = default;

    virtual TransitionOutcome step(const State& s, Action a, Rng& rng) const = 0;

private:
    std::uint64_t calls_ = 0;
};

inline TransitionOutcome sample_transition(GenerativeModel& model, const State& s, Action a, Rng& rng) {
    return model.sample(s, a, rng);
}

/// Sum_k gamma^k * rewards[k]; 0 for an empty sequence.
double discounted_return(std::span<const double> rewards, double gamma);

/// Picks one of `count` tied candidates uniformly; draws from `rng` only when
/// there is an actual tie.
std::size_t break_tie(std::size_t count, Rng& rng);

}  // namespace openloop
