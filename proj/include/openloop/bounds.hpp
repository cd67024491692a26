#pragma once

#include "openloop/mdp.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace openloop {

/// f(t) = ceil(rho * ln t), the guaranteed number of trials of every action
/// at a node developed t times.
std::uint64_t trial_lower_bound(std::uint64_t t, double rho);

/// b_0 = n, b_d = ceil(rho * ln b_{d-1}); stops once a term would be <= 1.
std::vector<std::uint64_t> budget_sequence(std::uint64_t n, double rho, int max_depth);

struct FailureBound {
    double probability = 1.0;
    std::uint64_t budget = 0;  // f^d(n), or n at depth 0
    bool vacuous = true;       // no information: budget <= 1 or bound == 1
};

/// Upper bound on the probability that the recommended action at depth d is
/// not node-wise optimal, given initial budget n and minimum gap delta:
/// min(1, f^d(n)^(-(rho/2) delta^2)).
FailureBound failure_bound(std::uint64_t n, double rho, double delta, int depth);

struct BoundRow {
    std::uint64_t n = 0;
    int depth = 0;
    double bound = 1.0;
    bool vacuous = true;
};

/// Rows ordered by depth, then by the order of `n_grid`.
std::vector<BoundRow> bound_curve(double rho, double delta, std::span<const int> depths,
                                  std::span<const std::uint64_t> n_grid);

/// Single-state, two-arm Bernoulli bandit. Arm 0 is optimal with mean
/// 0.5 + gap/2, arm 1 has mean 0.5 - gap/2. Every pull terminates.
class BernoulliBandit final : public GenerativeModel {
public:
    explicit BernoulliBandit(double gap);

    std::string_view name() const override { return "bernoulli-bandit"; }
    int num_actions() const override { return 2; }
    bool is_terminal(const State& s) const override { return *s.id != 0; }
    State initial_state() const override;
    bool discrete_states() const override { return true; }
    std::unique_ptr<GenerativeModel> clone() const override;

    double arm_mean(int arm) const { return arm == 0 ? 0.5 + 0.5 * gap_ : 0.5 - 0.5 * gap_; }

protected:
    TransitionOutcome step(const State& s, Action a, Rng& rng) const override;

private:
    double gap_;
};

struct BanditCell {
    std::uint64_t n = 0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    std::uint64_t min_pulls = 0;  // fewest pulls of any arm over all trials
    double failure_rate() const { return static_cast<double>(failures) / static_cast<double>(trials); }
};

struct Calibration {
    std::vector<BanditCell> cells;
    /// Largest rho with min_pulls >= ceil(rho ln n) at every n (trial-count constant).
    double trial_rho = 0.0;
    /// Largest rho for which failure_rate <= n^(-(rho/2) gap^2) at every n.
    double consistent_rho = 0.0;
};

struct CalibrationSettings {
    double gap = 0.27;
    double exploration = 0.7;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
};

/// Monte-Carlo estimate of the root failure rate of tree search on the
/// two-arm bandit at each budget, trials in parallel.
Calibration calibrate_bandit(const CalibrationSettings& settings, std::span<const std::uint64_t> n_grid);

/// Serial reference of calibrate_bandit; identical results.
Calibration calibrate_bandit_serial(const CalibrationSettings& settings, std::span<const std::uint64_t> n_grid);

}  // namespace openloop
