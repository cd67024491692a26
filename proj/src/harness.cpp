#include "openloop/harness.hpp"

#include "json_fields.hpp"
#include "openloop/csv.hpp"
#include "openloop/environments.hpp"
#include "openloop/seeding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace openloop {

using nlohmann::json;

std::string_view to_string(EnvironmentId id) {
    switch (id) {
        case EnvironmentId::Track1DDiscrete:
            return "track1d-discrete";
        case EnvironmentId::Track1DContinuous:
            return "track1d-continuous";
        case EnvironmentId::PtspContinuous:
            return "ptsp-continuous";
        case EnvironmentId::PtspDiscrete:
            return "ptsp-discrete";
    }
    return "?";
}

EnvironmentInstance make_environment(const EnvironmentConfig& config, double misstep) {
    switch (config.id) {
        case EnvironmentId::Track1DDiscrete:
            return {std::make_unique<DiscreteTrack1D>(misstep), track1d_discrete_optimal_policy()};
        case EnvironmentId::Track1DContinuous:
            return {std::make_unique<ContinuousTrack1D>(misstep, config.noise), track1d_continuous_optimal_policy()};
        case EnvironmentId::PtspContinuous:
            if (!config.map) {
                throw std::invalid_argument("continuous PTSP needs a map");
            }
            return {std::make_unique<ContinuousPtsp>(*config.map,
                                                     ContinuousPtsp::Params{misstep, config.noise, config.dtheta}),
                    ptsp_continuous_go_straight_policy()};
        case EnvironmentId::PtspDiscrete:
            if (!config.map) {
                throw std::invalid_argument("discrete PTSP needs a map");
            }
            return {std::make_unique<DiscretePtsp>(*config.map, misstep), ptsp_discrete_go_straight_policy()};
    }
    throw std::logic_error("unhandled environment");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

using detail::fail;
using detail::member;
using detail::number;
using detail::number_field;
using detail::optional_number;
using detail::string_field;

EnvironmentConfig parse_environment(const json& doc, const std::filesystem::path& base_dir) {
    const std::string where = "/environment";
    EnvironmentConfig env;
    const std::string id = string_field(doc, where, "id");
    if (id == "track1d-discrete") {
        env.id = EnvironmentId::Track1DDiscrete;
    } else if (id == "track1d-continuous") {
        env.id = EnvironmentId::Track1DContinuous;
        env.noise = 0.1;
    } else if (id == "ptsp-continuous") {
        env.id = EnvironmentId::PtspContinuous;
        env.noise = 0.02;
    } else if (id == "ptsp-discrete") {
        env.id = EnvironmentId::PtspDiscrete;
    } else {
        fail(where + "/id", "unknown environment \"" + id + "\"");
    }
    env.noise = optional_number(doc, where, "noise", env.noise);
    if (env.noise < 0.0) {
        fail(where + "/noise", "must be non-negative");
    }
    env.dtheta = optional_number(doc, where, "dtheta", env.dtheta);
    if (!(env.dtheta > 0.0)) {
        fail(where + "/dtheta", "must be positive");
    }
    if (env.id == EnvironmentId::PtspContinuous || env.id == EnvironmentId::PtspDiscrete) {
        const std::filesystem::path map_path = base_dir / string_field(doc, where, "map");
        PtspMap map;
        try {
            map = load_ptsp_map(map_path);
        } catch (const SchemaError& e) {
            fail(where + "/map", e.what());
        }
        const MapKind wanted = env.id == EnvironmentId::PtspContinuous ? MapKind::Continuous : MapKind::Discrete;
        if (map.kind != wanted) {
            fail(where + "/map", "map kind does not match the environment");
        }
        map.capture_radius = optional_number(doc, where, "capture_radius", map.capture_radius);
        if (doc.contains("time_limit")) {
            map.time_limit = static_cast<int>(detail::integer_field(doc, where, "time_limit"));
        }
        try {
            map.validate();
        } catch (const SchemaError& e) {
            fail(where, e.what());
        }
        env.map = std::move(map);
    }
    return env;
}

PlannerParams parse_planner(const json& doc) {
    const std::string where = "/planner";
    PlannerParams p;
    const std::int64_t budget = detail::integer_field(doc, where, "budget");
    if (budget < 1) {
        fail(where + "/budget", "must be positive");
    }
    p.budget = static_cast<std::uint64_t>(budget);
    p.exploration = number_field(doc, where, "exploration");
    if (p.exploration < 0.0) {
        fail(where + "/exploration", "must be non-negative");
    }
    p.discount = number_field(doc, where, "discount");
    if (!(p.discount >= 0.0 && p.discount < 1.0)) {
        fail(where + "/discount", "must lie in [0, 1)");
    }
    const std::int64_t horizon = detail::integer_field(doc, where, "horizon");
    if (horizon < 1) {
        fail(where + "/horizon", "must be positive");
    }
    p.horizon = static_cast<int>(horizon);
    return p;
}

AlgorithmConfig parse_algorithm(const json& doc, const std::string& where, std::vector<std::string>& warnings) {
    AlgorithmConfig alg;
    alg.name = string_field(doc, where, "name");
    if (alg.name.empty()) {
        fail(where + "/name", "must not be empty");
    }
    if (!doc.contains("criterion")) {
        fail(where + "/criterion", "missing required field (use \"oluct\" for the re-planning baseline)");
    }
    const std::string kind = string_field(doc, where, "criterion");
    if (kind == "oluct") {
        alg.replan_every_step = true;
        return alg;
    }
    try {
        alg.criterion.kind = parse_criterion_kind(kind);
    } catch (const std::invalid_argument& e) {
        fail(where + "/criterion", e.what());
    }
    const bool needs_threshold = alg.criterion.kind == CriterionKind::SDM || alg.criterion.kind == CriterionKind::SDV ||
                                 alg.criterion.kind == CriterionKind::SDSD || alg.criterion.kind == CriterionKind::RDV;
    if (!needs_threshold) {
        return alg;
    }
    double tau = number_field(doc, where, "threshold");
    switch (alg.criterion.kind) {
        case CriterionKind::SDM:
            if (tau > 1.0) {
                warnings.push_back(where + "/threshold: " + csv::number(tau) +
                                   " read as a percentage, using fraction " + csv::number(tau / 100.0));
                tau /= 100.0;
            }
            if (!(tau > 0.0 && tau <= 1.0)) {
                fail(where + "/threshold", "majority fraction must lie in (0, 1] (or (0, 100] as a percentage)");
            }
            alg.criterion.sdm_fraction = tau;
            break;
        case CriterionKind::SDV:
            alg.criterion.sdv = tau;
            break;
        case CriterionKind::SDSD:
            alg.criterion.sdsd = tau;
            break;
        case CriterionKind::RDV:
            alg.criterion.rdv = tau;
            break;
        default:
            break;
    }
    if (tau < 0.0) {
        fail(where + "/threshold", "must be non-negative");
    }
    return alg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) {
        fail("/", "expected an object");
    }
    ExperimentConfig cfg;
    cfg.environment = parse_environment(member(doc, "", "environment"), base_dir);

    const json& q_grid = member(doc, "", "q_grid");
    if (!q_grid.is_array() || q_grid.empty()) {
        fail("/q_grid", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        const double q = number(q_grid[i], "/q_grid/" + std::to_string(i));
        if (q < 0.0 || q > 1.0) {
            fail("/q_grid/" + std::to_string(i), "misstep probability must lie in [0, 1]");
        }
        cfg.q_grid.push_back(q);
    }

    const std::int64_t episodes = detail::integer_field(doc, "", "episodes");
    if (episodes < 1) {
        fail("/episodes", "must be at least 1");
    }
    cfg.episodes = static_cast<std::uint64_t>(episodes);
    cfg.planner = parse_planner(member(doc, "", "planner"));

    const json& algorithms = member(doc, "", "algorithms");
    if (!algorithms.is_array() || algorithms.empty()) {
        fail("/algorithms", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < algorithms.size(); ++i) {
        const std::string where = "/algorithms/" + std::to_string(i);
        AlgorithmConfig alg = parse_algorithm(algorithms[i], where, cfg.warnings);
        const bool continuous =
            cfg.environment.id == EnvironmentId::Track1DContinuous || cfg.environment.id == EnvironmentId::PtspContinuous;
        if (!alg.replan_every_step && alg.criterion.kind == CriterionKind::SDM && continuous) {
            fail(where + "/criterion", "sdm needs a discrete state space");
        }
        for (const AlgorithmConfig& other : cfg.algorithms) {
            if (other.name == alg.name) {
                fail(where + "/name", "duplicate algorithm name \"" + alg.name + "\"");
            }
        }
        cfg.algorithms.push_back(std::move(alg));
    }

    if (doc.contains("seed")) {
        const json& seed = doc.at("seed");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
            fail("/seed", "expected a non-negative integer");
        }
        cfg.seed = seed.get<std::uint64_t>();
    }
    if (doc.contains("output")) {
        cfg.output = string_field(doc, "", "output");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    const json doc = read_json_file(path);
    try {
        return parse_experiment_config(doc, path.parent_path());
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Episodes

std::uint64_t planning_seed(std::uint64_t master, double q, std::string_view algorithm, std::uint64_t episode) {
    return combine_seed(combine_seed(combine_seed(master, hash_real(q)), hash_name(algorithm)), episode);
}

std::uint64_t world_seed(std::uint64_t master, double q, std::uint64_t episode) {
    return combine_seed(combine_seed(combine_seed(master, hash_real(q)), hash_name("world")), episode);
}

EpisodeRow run_episode(const ExperimentConfig& config, std::size_t q_index, std::size_t algorithm_index,
                       std::uint64_t episode, bool trace_steps) {
    const double q = config.q_grid.at(q_index);
    const AlgorithmConfig& alg = config.algorithms.at(algorithm_index);
    EnvironmentInstance env = make_environment(config.environment, q);
    std::unique_ptr<GenerativeModel> world = env.model->clone();

    const std::uint64_t seed = planning_seed(config.seed, q, alg.name, episode);
    Rng planning_rng(seed);
    Rng world_rng(world_seed(config.seed, q, episode));

    EpisodeRow row;
    row.environment = std::string(env.model->name());
    row.q = q;
    row.algorithm = alg.name;
    row.episode = episode;

    EpisodeContext ctx{*env.model, *world, env.rollout, config.planner, planning_rng, world_rng, {}};
    if (trace_steps) {
        ctx.observer = [&row](const StepEvent& e) { row.trace.push_back(e); };
    }
    const State s0 = env.model->initial_state();
    row.record = alg.replan_every_step ? run_oluct(ctx, s0) : run_olta(ctx, s0, alg.criterion);
    row.record.seed = seed;
    return row;
}

namespace {

struct Job {
    std::size_t q_index;
    std::size_t algorithm_index;
    std::uint64_t episode;
};

std::vector<Job> grid_jobs(const ExperimentConfig& config) {
    std::vector<Job> jobs;
    jobs.reserve(config.q_grid.size() * config.algorithms.size() * config.episodes);
    for (std::size_t qi = 0; qi < config.q_grid.size(); ++qi) {
        for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
            for (std::uint64_t e = 0; e < config.episodes; ++e) {
                jobs.push_back({qi, ai, e});
            }
        }
    }
    return jobs;
}

}  // namespace

std::vector<EpisodeRow> run_grid(const ExperimentConfig& config, const GridOptions& options) {
    const std::vector<Job> jobs = grid_jobs(config);
    std::vector<EpisodeRow> rows(jobs.size());
    std::exception_ptr failure;
    std::mutex failure_mutex;

    int threads = options.workers;
#ifdef _OPENMP
    if (threads <= 0) {
        threads = omp_get_max_threads();
    }
#else
    threads = 1;
#endif
    const auto count = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            const Job& job = jobs[static_cast<std::size_t>(i)];
            rows[static_cast<std::size_t>(i)] =
                run_episode(config, job.q_index, job.algorithm_index, job.episode, options.trace_steps);
        } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return rows;
}

std::vector<EpisodeRow> run_grid_serial(const ExperimentConfig& config, bool trace_steps) {
    std::vector<EpisodeRow> rows;
    for (const Job& job : grid_jobs(config)) {
        rows.push_back(run_episode(config, job.q_index, job.algorithm_index, job.episode, trace_steps));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV output

void write_episode_csv(std::ostream& out, const std::vector<EpisodeRow>& rows) {
    out << "env,q,algorithm,episode,loss,model_calls,wall_time_us,replans,steps,seed\n";
    for (const EpisodeRow& r : rows) {
        out << csv::field(r.environment) << ',' << csv::number(r.q) << ',' << csv::field(r.algorithm) << ','
            << r.episode << ',' << csv::number(r.record.loss) << ',' << r.record.model_calls << ','
            << r.record.wall_time_us << ',' << r.record.replans << ',' << r.record.steps << ',' << r.record.seed
            << '\n';
    }
}

void write_step_csv(std::ostream& out, const std::vector<EpisodeRow>& rows) {
    out << "env,q,algorithm,episode,step,source,verdict,action,reward,terminal,x0,x1,x2,x3\n";
    for (const EpisodeRow& r : rows) {
        for (const StepEvent& e : r.trace) {
            out << csv::field(r.environment) << ',' << csv::number(r.q) << ',' << csv::field(r.algorithm) << ','
                << r.episode << ',' << e.step << ',' << to_string(e.source) << ',' << to_string(e.verdict) << ','
                << e.action.index << ',' << csv::number(e.outcome.reward) << ',' << (e.outcome.terminal ? 1 : 0);
            for (std::size_t k = 0; k < kMaxStateDims; ++k) {
                out << ',';
                if (k < e.state.dims) {
                    out << csv::number(e.state.x[k]);
                }
            }
            out << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

double parse_real(const std::string& text, std::size_t line, const char* column) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw SchemaError("line " + std::to_string(line) + ": column " + column + ": not a number: \"" + text + "\"");
    }
    return v;
}

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary m;
    for (double v : values) {
        m.mean += v;
    }
    m.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - m.mean) * (v - m.mean);
        }
        m.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return m;
}

}  // namespace

std::vector<EpisodeSample> read_episode_csv(std::istream& in) {
    const auto table = csv::read(in);
    if (table.empty()) {
        throw SchemaError("line 1: missing header");
    }
    const std::vector<std::string>& header = table.front();
    auto column = [&](const char* name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw SchemaError(std::string("line 1: missing column \"") + name + "\"");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t env = column("env");
    const std::size_t q = column("q");
    const std::size_t alg = column("algorithm");
    const std::size_t loss = column("loss");
    const std::size_t calls = column("model_calls");
    const std::size_t wall = column("wall_time_us");

    std::vector<EpisodeSample> out;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const auto& row = table[i];
        const std::size_t line = i + 1;
        if (row.size() != header.size()) {
            throw SchemaError("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                              " fields, found " + std::to_string(row.size()));
        }
        out.push_back({row[env], parse_real(row[q], line, "q"), row[alg], parse_real(row[loss], line, "loss"),
                       parse_real(row[calls], line, "model_calls"), parse_real(row[wall], line, "wall_time_us")});
    }
    return out;
}

std::vector<SummaryRow> aggregate(const std::vector<EpisodeSample>& samples) {
    struct Group {
        std::vector<double> loss;
        std::vector<double> calls;
        std::vector<double> wall;
    };
    std::map<std::tuple<std::string, std::string, double>, Group> groups;
    for (const EpisodeSample& s : samples) {
        Group& g = groups[{s.environment, s.algorithm, s.q}];
        g.loss.push_back(s.loss);
        g.calls.push_back(s.model_calls);
        g.wall.push_back(s.wall_time_us);
    }
    std::vector<SummaryRow> rows;
    for (const auto& [key, g] : groups) {
        rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), g.loss.size(), summarize(g.loss),
                        summarize(g.calls), summarize(g.wall)});
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "env,algorithm,q,count,loss_mean,loss_std,model_calls_mean,model_calls_std,wall_time_us_mean,"
           "wall_time_us_std\n";
    for (const SummaryRow& r : rows) {
        out << csv::field(r.environment) << ',' << csv::field(r.algorithm) << ',' << csv::number(r.q) << ','
            << r.count << ',' << csv::number(r.loss.mean) << ',' << csv::number(r.loss.stddev) << ','
            << csv::number(r.model_calls.mean) << ',' << csv::number(r.model_calls.stddev) << ','
            << csv::number(r.wall_time_us.mean) << ',' << csv::number(r.wall_time_us.stddev) << '\n';
    }
}

}  // namespace openloop
