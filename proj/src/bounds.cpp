#include "openloop/bounds.hpp"

#include "openloop/seeding.hpp"
#include "openloop/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace openloop {

std::uint64_t trial_lower_bound(std::uint64_t t, double rho) {
    if (t == 0) {
        return 0;
    }
    const double v = std::ceil(rho * std::log(static_cast<double>(t)));
    return v <= 0.0 ? 0 : static_cast<std::uint64_t>(v);
}

std::vector<std::uint64_t> budget_sequence(std::uint64_t n, double rho, int max_depth) {
    std::vector<std::uint64_t> seq{n};
    for (int d = 1; d <= max_depth; ++d) {
        const std::uint64_t next = trial_lower_bound(seq.back(), rho);
        if (next <= 1) {
            break;
        }
        seq.push_back(next);
    }
    return seq;
}

FailureBound failure_bound(std::uint64_t n, double rho, double delta, int depth) {
    FailureBound out;
    std::uint64_t b = n;
    for (int d = 0; d < depth && b > 1; ++d) {
        b = trial_lower_bound(b, rho);
    }
    out.budget = b;
    if (b <= 1) {
        return out;
    }
    const double exponent = -0.5 * rho * delta * delta;
    out.probability = std::min(1.0, std::pow(static_cast<double>(b), exponent));
    out.vacuous = out.probability >= 1.0;
    return out;
}

std::vector<BoundRow> bound_curve(double rho, double delta, std::span<const int> depths,
                                  std::span<const std::uint64_t> n_grid) {
    if (n_grid.empty()) {
        throw std::invalid_argument("bound curve needs a non-empty budget grid");
    }
    std::vector<BoundRow> rows;
    rows.reserve(depths.size() * n_grid.size());
    for (int d : depths) {
        for (std::uint64_t n : n_grid) {
            const FailureBound fb = failure_bound(n, rho, delta, d);
            rows.push_back({n, d, fb.probability, fb.vacuous});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------

BernoulliBandit::BernoulliBandit(double gap) : gap_(gap) {
    if (!(gap >= 0.0 && gap <= 1.0)) {
        throw std::invalid_argument("bandit gap must lie in [0, 1]");
    }
}

State BernoulliBandit::initial_state() const {
    const double f[1] = {0.0};
    return State::discrete(0, f);
}

std::unique_ptr<GenerativeModel> BernoulliBandit::clone() const {
    return std::make_unique<BernoulliBandit>(*this);
}

TransitionOutcome BernoulliBandit::step(const State&, Action a, Rng& rng) const {
    const double f[1] = {1.0};
    const bool win = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < arm_mean(a.index);
    return {State::discrete(1, f), win ? 1.0 : 0.0, true};
}

namespace {

struct TrialResult {
    bool failed = false;
    std::uint64_t min_pulls = 0;
};

TrialResult run_bandit_trial(const CalibrationSettings& settings, std::uint64_t n, std::uint64_t trial) {
    BernoulliBandit bandit(settings.gap);
    Rng rng(combine_seed(combine_seed(settings.seed, n), trial));
    const PlannerParams params{n, settings.exploration, 0.9, 1};
    const Policy unused = [](const State&, Rng&) { return Action{0}; };
    const Tree tree = build_tree(bandit, bandit.initial_state(), params, unused, rng);
    const Action rec = recommended_action(tree, rng);
    const auto& arms = tree.root().actions;
    return {rec.index != 0, std::min(arms[0].count, arms[1].count)};
}

void finish(Calibration& cal, double gap) {
    cal.trial_rho = std::numeric_limits<double>::infinity();
    cal.consistent_rho = std::numeric_limits<double>::infinity();
    for (const BanditCell& c : cal.cells) {
        const double log_n = std::log(static_cast<double>(c.n));
        cal.trial_rho = std::min(cal.trial_rho, static_cast<double>(c.min_pulls) / log_n);
        if (c.failures > 0) {
            cal.consistent_rho = std::min(cal.consistent_rho, -2.0 * std::log(c.failure_rate()) / (gap * gap * log_n));
        }
    }
}

void check_grid(std::span<const std::uint64_t> n_grid, const CalibrationSettings& settings) {
    if (n_grid.empty() || settings.trials == 0) {
        throw std::invalid_argument("calibration needs budgets and trials");
    }
    for (std::uint64_t n : n_grid) {
        if (n <= 2) {
            throw std::invalid_argument("calibration budgets must exceed the number of arms");
        }
    }
}

}  // namespace

Calibration calibrate_bandit(const CalibrationSettings& settings, std::span<const std::uint64_t> n_grid) {
    check_grid(n_grid, settings);
    Calibration cal;
    for (std::uint64_t n : n_grid) {
        std::uint64_t failures = 0;
        std::uint64_t min_pulls = std::numeric_limits<std::uint64_t>::max();
        const auto trials = static_cast<std::int64_t>(settings.trials);
#pragma omp parallel for schedule(static) reduction(+ : failures) reduction(min : min_pulls)
        for (std::int64_t t = 0; t < trials; ++t) {
            const TrialResult r = run_bandit_trial(settings, n, static_cast<std::uint64_t>(t));
            failures += r.failed ? 1 : 0;
            min_pulls = std::min(min_pulls, r.min_pulls);
        }
        cal.cells.push_back({n, settings.trials, failures, min_pulls});
    }
    finish(cal, settings.gap);
    return cal;
}

Calibration calibrate_bandit_serial(const CalibrationSettings& settings, std::span<const std::uint64_t> n_grid) {
    check_grid(n_grid, settings);
    Calibration cal;
    for (std::uint64_t n : n_grid) {
        BanditCell cell{n, settings.trials, 0, std::numeric_limits<std::uint64_t>::max()};
        for (std::uint64_t t = 0; t < settings.trials; ++t) {
            const TrialResult r = run_bandit_trial(settings, n, t);
            cell.failures += r.failed ? 1 : 0;
            cell.min_pulls = std::min(cell.min_pulls, r.min_pulls);
        }
        cal.cells.push_back(cell);
    }
    finish(cal, settings.gap);
    return cal;
}

}  // namespace openloop
