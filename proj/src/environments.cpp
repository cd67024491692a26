#include "openloop/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace openloop {
namespace {

/// With probability q, replaces `a` by one of the other K-1 actions uniformly.
Action apply_misstep(Action a, int num_actions, double q, Rng& rng) {
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= q) {
        return a;
    }
    int other = std::uniform_int_distribution<int>(0, num_actions - 2)(rng);
    if (other >= a.index) {
        ++other;
    }
    return Action{other};
}

double gaussian(double sigma, Rng& rng) {
    if (sigma <= 0.0) {
        return 0.0;
    }
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

/// Direction of a track move: +1 with probability 1 - q for `right` and q for
/// `left`. One uniform is drawn either way and compared against P(right), so
/// at q = 0.5 the outcome does not depend on the action.
double track_direction(Action a, int right, double q, Rng& rng) {
    const double p_right = a.index == right ? 1.0 - q : q;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_right ? 1.0 : -1.0;
}

void check_probability(double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("misstep probability must lie in [0, 1]");
    }
}

// Liang-Barsky clip of the segment against the closed rectangle.
bool segment_touches(const Rect& r, double x0, double y0, double x1, double y1) {
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {x0 - r.x, r.x + r.w - x0, y0 - r.y, r.y + r.h - y0};
    double t0 = 0.0;
    double t1 = 1.0;
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) {
                return false;
            }
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0) {
            t0 = std::max(t0, t);
        } else {
            t1 = std::min(t1, t);
        }
    }
    return t0 <= t1;
}

std::uint32_t full_mask(std::size_t waypoints) {
    return waypoints >= 32 ? 0xffffffffu : ((1u << waypoints) - 1u);
}

constexpr int kGridDx[4] = {1, 0, -1, 0};
constexpr int kGridDy[4] = {0, -1, 0, 1};

}  // namespace

double normalize_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    theta = std::fmod(theta, two_pi);
    if (theta <= -std::numbers::pi) {
        theta += two_pi;
    } else if (theta > std::numbers::pi) {
        theta -= two_pi;
    }
    return theta;
}

// ---------------------------------------------------------------------------
// Discrete 1D track

DiscreteTrack1D::DiscreteTrack1D(double misstep) : misstep_(misstep) {
    check_probability(misstep);
}

State DiscreteTrack1D::state(std::int64_t cell) {
    const double f[1] = {static_cast<double>(cell)};
    return State::discrete(cell, f);
}

bool DiscreteTrack1D::is_terminal(const State& s) const {
    return *s.id <= 0 || *s.id >= 4;
}

std::unique_ptr<GenerativeModel> DiscreteTrack1D::clone() const {
    return std::make_unique<DiscreteTrack1D>(*this);
}

TransitionOutcome DiscreteTrack1D::step(const State& s, Action a, Rng& rng) const {
    const auto next = *s.id + static_cast<std::int64_t>(track_direction(a, kRight, misstep_, rng));
    const bool end = next == 0 || next == 4;
    return {state(next), end ? 1.0 : 0.0, end};
}

Policy track1d_discrete_optimal_policy() {
    return [](const State& s, Rng& rng) {
        if (*s.id < DiscreteTrack1D::kStart) {
            return Action{DiscreteTrack1D::kLeft};
        }
        if (*s.id > DiscreteTrack1D::kStart) {
            return Action{DiscreteTrack1D::kRight};
        }
        return Action{static_cast<int>(break_tie(2, rng))};
    };
}

// ---------------------------------------------------------------------------
// Continuous 1D track

ContinuousTrack1D::ContinuousTrack1D(double misstep, double noise_sigma)
    : misstep_(misstep), noise_sigma_(noise_sigma) {
    check_probability(misstep);
    if (!(noise_sigma >= 0.0)) {
        throw std::invalid_argument("noise sigma must be non-negative");
    }
}

State ContinuousTrack1D::state(double position) {
    const double f[1] = {position};
    return State::continuous(f);
}

bool ContinuousTrack1D::is_terminal(const State& s) const {
    return s.x[0] <= 0.0 || s.x[0] >= kWidth;
}

std::unique_ptr<GenerativeModel> ContinuousTrack1D::clone() const {
    return std::make_unique<ContinuousTrack1D>(*this);
}

TransitionOutcome ContinuousTrack1D::step(const State& s, Action a, Rng& rng) const {
    const double next = s.x[0] + track_direction(a, kRight, misstep_, rng) + gaussian(noise_sigma_, rng);
    const bool end = next <= 0.0 || next >= kWidth;
    return {state(next), end ? 1.0 : 0.0, end};
}

Policy track1d_continuous_optimal_policy() {
    return [](const State& s, Rng& rng) {
        if (s.x[0] < ContinuousTrack1D::kStart) {
            return Action{ContinuousTrack1D::kLeft};
        }
        if (s.x[0] > ContinuousTrack1D::kStart) {
            return Action{ContinuousTrack1D::kRight};
        }
        return Action{static_cast<int>(break_tie(2, rng))};
    };
}

// ---------------------------------------------------------------------------
// Continuous PTSP

ContinuousPtsp::ContinuousPtsp(PtspMap map, Params params)
    : map_(std::move(map)), params_(params), all_visited_(full_mask(map_.waypoints.size())) {
    check_probability(params_.misstep);
    if (map_.kind != MapKind::Continuous) {
        throw std::invalid_argument("continuous PTSP needs a continuous map");
    }
    if (!(params_.noise_sigma >= 0.0) || !(params_.dtheta > 0.0)) {
        throw std::invalid_argument("PTSP noise must be non-negative and dtheta positive");
    }
    map_.validate();
}

State ContinuousPtsp::state(double x, double y, double theta, double v, std::uint32_t visited, std::int32_t tick) {
    const double f[4] = {x, y, normalize_angle(theta), v};
    State s = State::continuous(f);
    s.visited = visited;
    s.tick = tick;
    return s;
}

State ContinuousPtsp::initial_state() const {
    return state(map_.start.x, map_.start.y, map_.start_theta, map_.start_speed);
}

bool ContinuousPtsp::is_terminal(const State& s) const {
    return s.visited == all_visited_ || s.tick >= map_.time_limit;
}

std::unique_ptr<GenerativeModel> ContinuousPtsp::clone() const {
    return std::make_unique<ContinuousPtsp>(*this);
}

bool ContinuousPtsp::blocked(double x0, double y0, double x1, double y1) const {
    if (x1 <= 0.0 || y1 <= 0.0 || x1 >= map_.width || y1 >= map_.height) {
        return true;
    }
    return std::any_of(map_.walls.begin(), map_.walls.end(),
                       [&](const Rect& r) { return segment_touches(r, x0, y0, x1, y1); });
}

TransitionOutcome ContinuousPtsp::step(const State& s, Action a, Rng& rng) const {
    const Action taken = apply_misstep(a, 3, params_.misstep, rng);
    double turn = 0.0;
    if (taken.index == kTurnLeft) {
        turn = params_.dtheta;
    } else if (taken.index == kTurnRight) {
        turn = -params_.dtheta;
    }
    const double x = s.x[0];
    const double y = s.x[1];
    const double v = s.x[3];
    const double theta = normalize_angle(s.x[2] + turn);
    const double cx = x + v * std::cos(theta);
    const double cy = y + v * std::sin(theta);

    TransitionOutcome out;
    if (blocked(x, y, cx, cy)) {
        out.next_state = state(x, y, theta + std::numbers::pi, v, s.visited, s.tick + 1);
        out.reward = -1.0;
    } else {
        double ex = gaussian(params_.noise_sigma, rng);
        double ey = gaussian(params_.noise_sigma, rng);
        const double etheta = gaussian(params_.noise_sigma, rng);
        if (blocked(cx, cy, cx + ex, cy + ey)) {
            // pull the noisy point back toward the free noiseless position
            double lo = 0.0;
            double hi = 1.0;
            for (int i = 0; i < 40; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (blocked(cx, cy, cx + mid * ex, cy + mid * ey)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            ex *= lo;
            ey *= lo;
        }
        const double nx = cx + ex;
        const double ny = cy + ey;
        std::uint32_t visited = s.visited;
        double reward = 0.0;
        const double r2 = map_.capture_radius * map_.capture_radius;
        for (std::size_t i = 0; i < map_.waypoints.size(); ++i) {
            const std::uint32_t bit = 1u << i;
            if (visited & bit) {
                continue;
            }
            const double dx = nx - map_.waypoints[i].x;
            const double dy = ny - map_.waypoints[i].y;
            if (dx * dx + dy * dy <= r2) {
                visited |= bit;
                reward += 1.0;
            }
        }
        out.next_state = state(nx, ny, theta + etheta, v, visited, s.tick + 1);
        out.reward = reward;
    }
    out.terminal = is_terminal(out.next_state);
    return out;
}

Policy ptsp_continuous_go_straight_policy() {
    return [](const State&, Rng&) { return Action{ContinuousPtsp::kStraight}; };
}

// ---------------------------------------------------------------------------
// Discrete PTSP

double grid_heading(int action) {
    switch (action) {
        case DiscretePtsp::kRight:
            return 0.0;
        case DiscretePtsp::kDown:
            return -std::numbers::pi / 2.0;
        case DiscretePtsp::kLeft:
            return std::numbers::pi;
        case DiscretePtsp::kUp:
            return std::numbers::pi / 2.0;
        default:
            throw std::invalid_argument("grid action out of range");
    }
}

DiscretePtsp::DiscretePtsp(PtspMap map, double misstep)
    : map_(std::move(map)), misstep_(misstep), all_visited_(full_mask(map_.waypoints.size())) {
    check_probability(misstep);
    if (map_.kind != MapKind::Discrete) {
        throw std::invalid_argument("discrete PTSP needs a discrete map");
    }
    map_.validate();
}

State DiscretePtsp::state(int cx, int cy, double theta, std::uint32_t visited, std::int32_t tick) const {
    const double f[4] = {static_cast<double>(cx), static_cast<double>(cy), normalize_angle(theta), 1.0};
    State s = State::discrete(static_cast<std::int64_t>(cy) * static_cast<std::int64_t>(map_.width) + cx, f);
    s.visited = visited;
    s.tick = tick;
    return s;
}

State DiscretePtsp::initial_state() const {
    return state(static_cast<int>(map_.start.x), static_cast<int>(map_.start.y), map_.start_theta);
}

bool DiscretePtsp::is_terminal(const State& s) const {
    return s.visited == all_visited_ || s.tick >= map_.time_limit;
}

std::unique_ptr<GenerativeModel> DiscretePtsp::clone() const {
    return std::make_unique<DiscretePtsp>(*this);
}

bool DiscretePtsp::free_cell(int cx, int cy) const {
    if (cx < 0 || cy < 0 || cx >= static_cast<int>(map_.width) || cy >= static_cast<int>(map_.height)) {
        return false;
    }
    return std::none_of(map_.walls.begin(), map_.walls.end(),
                        [&](const Rect& r) { return r.contains_strict(cx + 0.5, cy + 0.5); });
}

bool DiscretePtsp::action_available(const State& s, Action a) const {
    const int cx = static_cast<int>(s.x[0]);
    const int cy = static_cast<int>(s.x[1]);
    return free_cell(cx + kGridDx[a.index], cy + kGridDy[a.index]);
}

TransitionOutcome DiscretePtsp::step(const State& s, Action a, Rng& rng) const {
    const Action taken = apply_misstep(a, 4, misstep_, rng);
    const int cx = static_cast<int>(s.x[0]);
    const int cy = static_cast<int>(s.x[1]);
    const int nx = cx + kGridDx[taken.index];
    const int ny = cy + kGridDy[taken.index];

    TransitionOutcome out;
    if (!free_cell(nx, ny)) {
        out.next_state = state(cx, cy, s.x[2], s.visited, s.tick + 1);
    } else {
        std::uint32_t visited = s.visited;
        for (std::size_t i = 0; i < map_.waypoints.size(); ++i) {
            const std::uint32_t bit = 1u << i;
            if (!(visited & bit) && static_cast<int>(map_.waypoints[i].x) == nx &&
                static_cast<int>(map_.waypoints[i].y) == ny) {
                visited |= bit;
                out.reward += 1.0;
            }
        }
        out.next_state = state(nx, ny, grid_heading(taken.index), visited, s.tick + 1);
    }
    out.terminal = is_terminal(out.next_state);
    return out;
}

Policy ptsp_discrete_go_straight_policy() {
    return [](const State& s, Rng&) {
        const double c = std::cos(s.x[2]);
        const double sn = std::sin(s.x[2]);
        if (std::abs(c) >= std::abs(sn)) {
            return Action{c > 0.0 ? DiscretePtsp::kRight : DiscretePtsp::kLeft};
        }
        return Action{sn > 0.0 ? DiscretePtsp::kUp : DiscretePtsp::kDown};
    };
}

}  // namespace openloop
