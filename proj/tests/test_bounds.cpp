#include "support.hpp"

#include "openloop/bounds.hpp"

#include <doctest.h>

using namespace openloop;

TEST_CASE("budget sequence examples") {
    CHECK(budget_sequence(100, 2.0, 2) == std::vector<std::uint64_t>{100, 10, 5});
    CHECK(budget_sequence(100, 2.0, 4) == std::vector<std::uint64_t>{100, 10, 5, 4, 3});
    CHECK(budget_sequence(1000, 1e-9, 3) == std::vector<std::uint64_t>{1000});
    CHECK(budget_sequence(100, 2.0, 0) == std::vector<std::uint64_t>{100});
}

TEST_CASE("budget sequence matches the recurrence") {
    for (double rho : {0.5, 1.0, 2.0, 3.7}) {
        for (std::uint64_t n : {3ull, 17ull, 100ull, 123456ull}) {
            const auto seq = budget_sequence(n, rho, 6);
            CHECK(seq.front() == n);
            for (std::size_t i = 1; i < seq.size(); ++i) {
                CHECK(seq[i] == static_cast<std::uint64_t>(std::ceil(rho * std::log(static_cast<double>(seq[i - 1])))));
                CHECK(seq[i] > 1);
            }
        }
    }
}

TEST_CASE("failure bound spot values") {
    const auto d1 = failure_bound(100, 2.0, 0.27, 1);
    CHECK(d1.budget == 10);
    CHECK(d1.probability == doctest::Approx(0.84548).epsilon(1e-4));
    CHECK(d1.probability == doctest::Approx(std::exp(-0.0729 * std::log(10.0))).epsilon(1e-12));
    const auto d2 = failure_bound(100, 2.0, 0.27, 2);
    CHECK(d2.budget == 5);
    CHECK(d2.probability == doctest::Approx(0.88935).epsilon(1e-4));
    CHECK_FALSE(d2.vacuous);

    const auto d0 = failure_bound(1000000, 2.0, 0.27, 0);
    CHECK(d0.probability == doctest::Approx(std::pow(1e6, -0.0729)).epsilon(1e-12));
    CHECK(failure_bound(100, 2.0, 0.0, 1).probability == 1.0);
    CHECK(failure_bound(100, 2.0, 0.0, 1).vacuous);
}

TEST_CASE("vacuous once the composed budget collapses") {
    const auto fb = failure_bound(100, 0.1, 0.27, 2);
    CHECK(fb.vacuous);
    CHECK(fb.probability == 1.0);
    // f(2) = ceil(2 ln 2) = 2 is a fixed point, so rho = 2 never collapses there
    CHECK_FALSE(failure_bound(2, 2.0, 0.27, 5).vacuous);
    CHECK(failure_bound(2, 1.0, 0.27, 1).vacuous);
}

TEST_CASE("failure bound monotonicity") {
    const std::vector<std::uint64_t> grid{10, 30, 100, 300, 1000, 10000, 100000, 1000000, 1000000000};
    for (int d = 0; d <= 3; ++d) {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            CHECK(failure_bound(grid[i], 2.0, 0.27, d).probability <= failure_bound(grid[i - 1], 2.0, 0.27, d).probability);
        }
        CHECK(failure_bound(1000000000, 2.0, 0.27, d).probability < failure_bound(1000, 2.0, 0.27, d).probability);
    }
    for (std::uint64_t n : grid) {
        for (int d = 1; d <= 3; ++d) {
            CHECK(failure_bound(n, 2.0, 0.27, d).probability >= failure_bound(n, 2.0, 0.27, d - 1).probability);
        }
    }
}

TEST_CASE("bound curve layout") {
    const std::vector<int> depths{0, 1, 2, 3};
    const std::vector<std::uint64_t> grid{100, 1000};
    const auto rows = bound_curve(2.0, 0.27, depths, grid);
    REQUIRE(rows.size() == 8);
    CHECK(rows[2].depth == 1);
    CHECK(rows[2].n == 100);
    CHECK(rows[2].bound == doctest::Approx(0.84548).epsilon(1e-4));
    CHECK_THROWS(bound_curve(2.0, 0.27, depths, std::span<const std::uint64_t>{}));
}

TEST_CASE("trial lower bound") {
    CHECK(trial_lower_bound(100, 2.0) == 10);
    CHECK(trial_lower_bound(1, 2.0) == 0);
    CHECK(trial_lower_bound(0, 2.0) == 0);
}

TEST_CASE("bandit model") {
    BernoulliBandit bandit(0.27);
    CHECK(bandit.arm_mean(0) == doctest::Approx(0.635));
    CHECK(bandit.arm_mean(1) == doctest::Approx(0.365));
    Rng rng(1);
    int wins = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto out = bandit.sample(bandit.initial_state(), Action{0}, rng);
        CHECK(out.terminal);
        wins += out.reward > 0 ? 1 : 0;
    }
    CHECK(std::abs(wins / static_cast<double>(n) - 0.635) < 3 * std::sqrt(0.635 * 0.365 / n));
}

TEST_CASE("calibration: parallel matches the serial reference") {
    CalibrationSettings s;
    s.trials = 800;
    const std::vector<std::uint64_t> grid{20, 50};
    const Calibration par = calibrate_bandit(s, grid);
    const Calibration ser = calibrate_bandit_serial(s, grid);
    REQUIRE(par.cells.size() == ser.cells.size());
    for (std::size_t i = 0; i < par.cells.size(); ++i) {
        CHECK(par.cells[i].failures == ser.cells[i].failures);
        CHECK(par.cells[i].min_pulls == ser.cells[i].min_pulls);
    }
    CHECK(par.trial_rho == ser.trial_rho);
    CHECK(par.trial_rho > 0.0);
    CHECK_THROWS(calibrate_bandit(s, std::vector<std::uint64_t>{2}));
}
