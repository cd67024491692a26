// Serial reference vs OpenMP kernels: the episode grid and the bandit
// calibration.

#include "openloop/bounds.hpp"
#include "openloop/harness.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

namespace {

openloop::ExperimentConfig track_config() {
    auto cfg = openloop::load_experiment_config(std::filesystem::path(OPENLOOP_DATA_DIR) / "configs" /
                                                "track1d-discrete.json");
    cfg.episodes = 50;
    return cfg;
}

void BM_GridSerial(benchmark::State& state) {
    const auto cfg = track_config();
    for (auto _ : state) {
        benchmark::DoNotOptimize(openloop::run_grid_serial(cfg));
    }
}

void BM_GridParallel(benchmark::State& state) {
    const auto cfg = track_config();
    const openloop::GridOptions options{static_cast<int>(state.range(0)), false};
    for (auto _ : state) {
        benchmark::DoNotOptimize(openloop::run_grid(cfg, options));
    }
}

const std::vector<std::uint64_t> kCalibrationGrid{50, 100, 200, 400};

openloop::CalibrationSettings calibration_settings() {
    openloop::CalibrationSettings s;
    s.trials = 1000;
    return s;
}

void BM_CalibrateSerial(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(openloop::calibrate_bandit_serial(calibration_settings(), kCalibrationGrid));
    }
}

void BM_CalibrateParallel(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(openloop::calibrate_bandit(calibration_settings(), kCalibrationGrid));
    }
}

}  // namespace

BENCHMARK(BM_GridSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrateParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
