#pragma once

#include "openloop/controller.hpp"
#include "openloop/criteria.hpp"
#include "openloop/mdp.hpp"
#include "openloop/ptsp_map.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace openloop {

enum class EnvironmentId { Track1DDiscrete, Track1DContinuous, PtspContinuous, PtspDiscrete };

std::string_view to_string(EnvironmentId id);

struct EnvironmentConfig {
    EnvironmentId id = EnvironmentId::Track1DDiscrete;
    double noise = 0.0;   // sigma_noise for the continuous environments
    double dtheta = 0.3;  // continuous PTSP heading increment
    std::optional<PtspMap> map;
};

/// A ready-to-run environment for one misstep probability.
struct EnvironmentInstance {
    std::unique_ptr<GenerativeModel> model;
    Policy rollout;
};

EnvironmentInstance make_environment(const EnvironmentConfig& config, double misstep);

struct AlgorithmConfig {
    std::string name;
    bool replan_every_step = false;  // OLUCT baseline
    CriterionConfig criterion;
};

struct ExperimentConfig {
    EnvironmentConfig environment;
    std::vector<double> q_grid;
    std::uint64_t episodes = 1;
    PlannerParams planner;
    std::vector<AlgorithmConfig> algorithms;
    std::uint64_t seed = 0;
    std::filesystem::path output = "results.csv";
    std::vector<std::string> warnings;  // non-fatal notes produced while parsing
};

/// Parses a config document. Relative map paths resolve against `base_dir`.
/// Throws SchemaError with the JSON pointer of the offending element.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct EpisodeRow {
    std::string environment;
    double q = 0.0;
    std::string algorithm;
    std::uint64_t episode = 0;
    EpisodeRecord record;
    std::vector<StepEvent> trace;  // filled only when tracing is requested
};

struct GridOptions {
    int workers = 0;          // 0: OpenMP default
    bool trace_steps = false;
};

/// Planning stream seed of one episode; depends on the algorithm.
std::uint64_t planning_seed(std::uint64_t master, double q, std::string_view algorithm, std::uint64_t episode);
/// Real-environment stream seed; shared by all algorithms for a (q, episode).
std::uint64_t world_seed(std::uint64_t master, double q, std::uint64_t episode);

/// Runs one (q, algorithm, episode) cell of the grid.
EpisodeRow run_episode(const ExperimentConfig& config, std::size_t q_index, std::size_t algorithm_index,
                       std::uint64_t episode, bool trace_steps = false);

/// Every (q, algorithm, episode) combination, episodes spread over OpenMP
/// threads. Rows come back ordered by q, then algorithm (config order), then
/// episode index, whatever the scheduling.
std::vector<EpisodeRow> run_grid(const ExperimentConfig& config, const GridOptions& options = {});

/// Single-threaded reference of run_grid with the same row order.
std::vector<EpisodeRow> run_grid_serial(const ExperimentConfig& config, bool trace_steps = false);

void write_episode_csv(std::ostream& out, const std::vector<EpisodeRow>& rows);
void write_step_csv(std::ostream& out, const std::vector<EpisodeRow>& rows);

/// Per-episode columns needed by aggregation.
struct EpisodeSample {
    std::string environment;
    double q = 0.0;
    std::string algorithm;
    double loss = 0.0;
    double model_calls = 0.0;
    double wall_time_us = 0.0;
};

/// Reads an episode CSV written by write_episode_csv. Throws SchemaError on a
/// missing column or an unparsable value (with its line number).
std::vector<EpisodeSample> read_episode_csv(std::istream& in);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // unbiased; 0 for a single sample
};

struct SummaryRow {
    std::string environment;
    std::string algorithm;
    double q = 0.0;
    std::uint64_t count = 0;
    MetricSummary loss;
    MetricSummary model_calls;
    MetricSummary wall_time_us;
};

/// Groups by (environment, q, algorithm); sorted by environment, algorithm, q.
std::vector<SummaryRow> aggregate(const std::vector<EpisodeSample>& samples);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace openloop
