// openloop: experiment driver for open-loop tree search with tree reuse.
//
//   openloop run --config configs/track1d-discrete.json --out results.csv
//   openloop aggregate --in results.csv --out summary.csv
//   openloop bounds --rho 2 --delta 0.27 --depths 0..3 --n-grid 10:1e6:50
//   openloop calibrate --n-grid 50,100,200,400
//   openloop dump-tree --config configs/ptsp-discrete.json --q 0.1

#include "openloop/bounds.hpp"
#include "openloop/csv.hpp"
#include "openloop/harness.hpp"
#include "openloop/seeding.hpp"
#include "openloop/tree.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

using namespace openloop;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, sep)) {
        parts.push_back(part);
    }
    return parts;
}

double parse_double(const std::string& text) {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
        throw std::invalid_argument("not a number: " + text);
    }
    return v;
}

// "100,200,400" or "lo:hi:k" (k log-spaced integers from lo to hi, duplicates dropped).
std::vector<std::uint64_t> parse_n_grid(const std::string& spec) {
    std::vector<std::uint64_t> grid;
    const auto range = split(spec, ':');
    if (range.size() == 3) {
        const double lo = parse_double(range[0]);
        const double hi = parse_double(range[1]);
        const int k = static_cast<int>(parse_double(range[2]));
        if (!(lo > 1.0 && hi >= lo && k >= 1)) {
            throw std::invalid_argument("--n-grid lo:hi:k needs 1 < lo <= hi and k >= 1");
        }
        for (int i = 0; i < k; ++i) {
            const double t = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
            const auto n = static_cast<std::uint64_t>(std::llround(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))));
            if (grid.empty() || grid.back() != n) {
                grid.push_back(n);
            }
        }
        return grid;
    }
    for (const std::string& item : split(spec, ',')) {
        const double v = parse_double(item);
        if (!(v > 1.0) || std::floor(v) != v) {
            throw std::invalid_argument("--n-grid entries must be integers > 1: " + item);
        }
        grid.push_back(static_cast<std::uint64_t>(v));
    }
    if (grid.empty()) {
        throw std::invalid_argument("--n-grid is empty");
    }
    return grid;
}

// "0..3" or "0,2,3"
std::vector<int> parse_depths(const std::string& spec) {
    std::vector<int> depths;
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(spec.substr(0, dots));
        const int hi = std::stoi(spec.substr(dots + 2));
        if (lo < 0 || hi < lo) {
            throw std::invalid_argument("--depths lo..hi needs 0 <= lo <= hi");
        }
        for (int d = lo; d <= hi; ++d) {
            depths.push_back(d);
        }
        return depths;
    }
    for (const std::string& item : split(spec, ',')) {
        const int d = std::stoi(item);
        if (d < 0) {
            throw std::invalid_argument("--depths entries must be non-negative");
        }
        depths.push_back(d);
    }
    return depths;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(path.string() + ": cannot open for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) {
        throw std::runtime_error(path.string() + ": write failed");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open-loop tree search with tree reuse: experiments and bounds"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run an experiment grid and write one CSV row per episode");
    std::string config_path;
    std::string out_path;
    std::string steps_path;
    int workers = 0;
    std::uint64_t episodes = 0;
    bool smoke = false;
    std::uint64_t seed = 0;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_path, "Episode CSV (default: the config's output)");
    run->add_option("--workers", workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    run->add_option("--episodes", episodes, "Override episodes per cell")->check(CLI::PositiveNumber);
    run->add_flag("--smoke", smoke, "20 episodes per cell");
    auto* seed_opt = run->add_option("--seed", seed, "Master seed")->envname("OPENLOOP_SEED");
    run->add_option("--steps-out", steps_path, "Also write a per-step trace CSV with criterion verdicts");

    // aggregate
    auto* agg = app.add_subcommand("aggregate", "Summarize an episode CSV per (env, q, algorithm)");
    std::string agg_in;
    std::string agg_out;
    agg->add_option("--in", agg_in, "Episode CSV")->required()->check(CLI::ExistingFile);
    agg->add_option("--out", agg_out, "Summary CSV")->required();

    // bounds
    auto* bnd = app.add_subcommand("bounds", "Failure-probability bound curves");
    double rho = 2.0;
    double delta = 0.27;
    std::string depths_spec = "0..3";
    std::string n_grid_spec = "10:1000000:60";
    std::string bnd_out;
    bnd->add_option("--rho", rho, "Trial constant")->check(CLI::NonNegativeNumber);
    bnd->add_option("--delta", delta, "Minimum action gap")->check(CLI::Range(0.0, 1.0));
    bnd->add_option("--depths", depths_spec, "Depths, lo..hi or a comma list");
    bnd->add_option("--n-grid", n_grid_spec, "Budgets, a comma list or lo:hi:k log-spaced");
    bnd->add_option("--out", bnd_out, "Output CSV (default: stdout)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Monte-Carlo estimate of the trial constant on a two-arm bandit");
    CalibrationSettings cal_settings;
    std::string cal_grid = "50,100,200,400";
    cal->add_option("--gap", cal_settings.gap, "Arm mean gap")->check(CLI::Range(0.0, 1.0));
    cal->add_option("--exploration", cal_settings.exploration, "UCB constant C_p");
    cal->add_option("--trials", cal_settings.trials, "Trials per budget")->check(CLI::PositiveNumber);
    cal->add_option("--seed", cal_settings.seed, "Seed");
    cal->add_option("--n-grid", cal_grid, "Budgets");

    // dump-tree
    auto* dump = app.add_subcommand("dump-tree", "Build one tree at the initial state and print it as JSON");
    std::string dump_config;
    double dump_q = 0.0;
    std::uint64_t dump_seed = 1;
    dump->add_option("--config", dump_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    dump->add_option("--q", dump_q, "Misstep probability")->check(CLI::Range(0.0, 1.0));
    dump->add_option("--seed", dump_seed, "Planning seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ExperimentConfig config = load_experiment_config(config_path);
            for (const std::string& w : config.warnings) {
                std::cerr << "warning: " << config_path << ": " << w << '\n';
            }
            if (smoke) {
                config.episodes = 20;
            }
            if (episodes > 0) {
                config.episodes = episodes;
            }
            if (seed_opt->count() > 0) {
                config.seed = seed;
            }
            const std::filesystem::path out = out_path.empty() ? config.output : std::filesystem::path(out_path);
            std::ofstream csv_out = open_output(out);
            const auto rows = run_grid(config, GridOptions{workers, !steps_path.empty()});
            write_episode_csv(csv_out, rows);
            finish(csv_out, out);
            if (!steps_path.empty()) {
                std::ofstream steps_out = open_output(steps_path);
                write_step_csv(steps_out, rows);
                finish(steps_out, steps_path);
            }
            std::cerr << "wrote " << rows.size() << " rows to " << out.string() << '\n';
        } else if (*agg) {
            std::ifstream in(agg_in);
            const auto samples = read_episode_csv(in);
            if (samples.empty()) {
                std::cerr << "warning: " << agg_in << ": no episode rows, summary is empty\n";
            }
            std::ofstream out = open_output(agg_out);
            write_summary_csv(out, aggregate(samples));
            finish(out, agg_out);
        } else if (*bnd) {
            const auto depths = parse_depths(depths_spec);
            const auto grid = parse_n_grid(n_grid_spec);
            const auto rows = bound_curve(rho, delta, depths, grid);
            std::ofstream file;
            if (!bnd_out.empty()) {
                file = open_output(bnd_out);
            }
            std::ostream& out = bnd_out.empty() ? std::cout : file;
            out << "n,d,bound,vacuous\n";
            for (const BoundRow& r : rows) {
                out << r.n << ',' << r.depth << ',' << csv::number(r.bound) << ',' << (r.vacuous ? 1 : 0) << '\n';
            }
            if (!bnd_out.empty()) {
                finish(file, bnd_out);
            }
        } else if (*cal) {
            const auto grid = parse_n_grid(cal_grid);
            const Calibration c = calibrate_bandit(cal_settings, grid);
            std::cout << "n,trials,failures,failure_rate,min_pulls,bound_at_trial_rho\n";
            for (const BanditCell& cell : c.cells) {
                const FailureBound b = failure_bound(cell.n, c.trial_rho, cal_settings.gap, 0);
                std::cout << cell.n << ',' << cell.trials << ',' << cell.failures << ','
                          << csv::number(cell.failure_rate()) << ',' << cell.min_pulls << ','
                          << csv::number(b.probability) << '\n';
            }
            std::cerr << "trial_rho=" << c.trial_rho << " consistent_rho=" << c.consistent_rho << '\n';
        } else if (*dump) {
            const ExperimentConfig config = load_experiment_config(dump_config);
            EnvironmentInstance env = make_environment(config.environment, dump_q);
            Rng rng(dump_seed);
            const Tree tree = build_tree(*env.model, env.model->initial_state(), config.planner, env.rollout, rng);
            std::cout << to_json(tree).dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
