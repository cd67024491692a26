#pragma once

#include "openloop/mdp.hpp"
#include "openloop/ptsp_map.hpp"

#include <memory>
#include <string_view>

namespace openloop {

/// Five-cell track s0..s4 starting in the middle. Actions: 0 = right, 1 = left.
/// With probability q the agent lands on the opposite neighbour. Entering
/// either end cell pays +1 and terminates.
class DiscreteTrack1D final : public GenerativeModel {
public:
    static constexpr int kRight = 0;
    static constexpr int kLeft = 1;
    static constexpr std::int64_t kStart = 2;

    explicit DiscreteTrack1D(double misstep);

    static State state(std::int64_t cell);

    std::string_view name() const override { return "track1d-discrete"; }
    int num_actions() const override { return 2; }
    bool is_terminal(const State& s) const override;
    State initial_state() const override { return state(kStart); }
    bool discrete_states() const override { return true; }
    std::unique_ptr<GenerativeModel> clone() const override;

    double misstep() const { return misstep_; }

protected:
    TransitionOutcome step(const State& s, Action a, Rng& rng) const override;

private:
    double misstep_;
};

/// Go toward the nearer end of the discrete track; uniform in the middle cell.
Policy track1d_discrete_optimal_policy();

/// Track of width 50, unit moves, Gaussian position noise after each move.
/// Reaching position <= 0 or >= 50 pays +1 and terminates.
class ContinuousTrack1D final : public GenerativeModel {
public:
    static constexpr int kRight = 0;
    static constexpr int kLeft = 1;
    static constexpr double kWidth = 50.0;
    static constexpr double kStart = 25.0;

    ContinuousTrack1D(double misstep, double noise_sigma);

    static State state(double position);

    std::string_view name() const override { return "track1d-continuous"; }
    int num_actions() const override { return 2; }
    bool is_terminal(const State& s) const override;
    State initial_state() const override { return state(kStart); }
    bool discrete_states() const override { return false; }
    std::unique_ptr<GenerativeModel> clone() const override;

protected:
    TransitionOutcome step(const State& s, Action a, Rng& rng) const override;

private:
    double misstep_;
    double noise_sigma_;
};

Policy track1d_continuous_optimal_policy();

/// Continuous physical travelling salesman problem.
///
/// State features are (x, y, theta, v). Actions: 0 = +dtheta, 1 = keep
/// heading, 2 = -dtheta. Each tick the agent turns, then moves v along its
/// heading. A move whose segment touches a wall or leaves the map is a crash:
/// the agent stays put, its heading flips and it receives -1. Otherwise the
/// position and heading get Gaussian noise and each newly captured waypoint
/// pays +1. Speed is constant over an episode.
class ContinuousPtsp final : public GenerativeModel {
public:
    static constexpr int kTurnLeft = 0;
    static constexpr int kStraight = 1;
    static constexpr int kTurnRight = 2;

    struct Params {
        double misstep = 0.0;
        double noise_sigma = 0.02;
        double dtheta = 0.3;
    };

    ContinuousPtsp(PtspMap map, Params params);

    static State state(double x, double y, double theta, double v, std::uint32_t visited = 0, std::int32_t tick = 0);

    std::string_view name() const override { return "ptsp-continuous"; }
    int num_actions() const override { return 3; }
    bool is_terminal(const State& s) const override;
    State initial_state() const override;
    bool discrete_states() const override { return false; }
    std::unique_ptr<GenerativeModel> clone() const override;

    const PtspMap& map() const { return map_; }
    const Params& params() const { return params_; }

    /// True when the closed segment p0->p1 touches a wall or leaves the map.
    bool blocked(double x0, double y0, double x1, double y1) const;

protected:
    TransitionOutcome step(const State& s, Action a, Rng& rng) const override;

private:
    PtspMap map_;
    Params params_;
    std::uint32_t all_visited_;
};

/// Always keep the current heading.
Policy ptsp_continuous_go_straight_policy();

/// Grid version of the PTSP. Actions: 0 = right, 1 = down, 2 = left, 3 = up
/// (up is +y). Moving into a wall or off the grid leaves the agent in place
/// without penalty. Features are (x, y, theta, 1) where theta is the last
/// movement direction.
class DiscretePtsp final : public GenerativeModel {
public:
    static constexpr int kRight = 0;
    static constexpr int kDown = 1;
    static constexpr int kLeft = 2;
    static constexpr int kUp = 3;

    DiscretePtsp(PtspMap map, double misstep);

    State state(int cx, int cy, double theta = 0.0, std::uint32_t visited = 0, std::int32_t tick = 0) const;

    std::string_view name() const override { return "ptsp-discrete"; }
    int num_actions() const override { return 4; }
    bool is_terminal(const State& s) const override;
    State initial_state() const override;
    bool discrete_states() const override { return true; }
    std::unique_ptr<GenerativeModel> clone() const override;

    /// False when `a` from `s` would run into a wall or off the grid.
    bool action_available(const State& s, Action a) const override;

    const PtspMap& map() const { return map_; }

protected:
    TransitionOutcome step(const State& s, Action a, Rng& rng) const override;

private:
    bool free_cell(int cx, int cy) const;

    PtspMap map_;
    double misstep_;
    std::uint32_t all_visited_;
};

/// Move in the direction of the last movement.
Policy ptsp_discrete_go_straight_policy();

/// Heading (radians) of a grid action.
double grid_heading(int action);

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

}  // namespace openloop
