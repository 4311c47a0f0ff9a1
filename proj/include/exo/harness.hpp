#pragma once

// Experiment configuration, multi-seed execution with exact regret
// accounting, aggregation and result export.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "exo/core.hpp"
#include "exo/environments.hpp"
#include "exo/learner.hpp"

namespace exo {

enum class ExportFormat { Csv, Json };

struct ExperimentConfig {
    /// {"name": ..., parameters...}; see make_environment().
    nlohmann::json environment = nlohmann::json::object();
    std::string algorithm;
    nlohmann::json hyperparameters = nlohmann::json::object();
    int episodes = 1;
    std::vector<std::uint64_t> seeds;
    ObservationMode mode = ObservationMode::None;
    std::string output_path;  // empty: no export
    ExportFormat format = ExportFormat::Csv;
    int threads = 0;  // 0: one per hardware thread
    std::uint64_t experiment_id = 0;
};

/// Parse and validate. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Throws ConfigError on an inconsistent config (unknown names, K < 1, no
/// seeds, plug-in without full observation, base-stock on a non-inventory
/// environment).
void validate_config(const ExperimentConfig& config);

struct Environment {
    std::string name;
    ExoMdp mdp;
    /// Set for inventory environments, whose results are reported as costs.
    std::optional<InventoryModel> inventory;

    bool is_cost() const { return inventory.has_value(); }
    /// Performance of a value in the reporting unit: the value itself, or
    /// the total cost for inventory environments.
    double report(double value) const { return inventory ? inventory->total_cost(value) : value; }
};

/// Names: scenario_1..3, inventory, toy_newsvendor, circle_toy, infection, exo_bandit,
/// hard_stationary, hard_nonstationary. `default_episodes` fills the K of
/// hard instances when the environment does not set it.
Environment make_environment(const nlohmann::json& spec, int default_episodes = 1);

std::unique_ptr<Learner> make_learner(const std::string& algorithm,
                                      const nlohmann::json& hyperparameters, const Environment& env,
                                      int episodes);

struct RegretRecord {
    int episode;
    double value;  // exact value (or cost) of the episode's policy
    double inst_regret;
    double cum_regret;
    double seconds;
};

struct SeedRun {
    std::uint64_t seed;
    std::vector<RegretRecord> records;
};

struct ExperimentResult {
    std::string environment;
    std::string algorithm;
    bool cost = false;
    double optimum = 0.0;  // V* or C*
    std::vector<SeedRun> runs;
};

/// Regret of one learner run: V* - V^{pi_k}, or C^{pi_k} - C* for costs.
std::vector<RegretRecord> regret_records(const Environment& env, double optimal_value,
                                         const std::vector<EpisodeOutcome>& outcomes);

/// Runs every seed (in parallel, results in seed order) and writes the
/// export when config.output_path is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct MeanStderr {
    double mean;
    double stderr_;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

struct Aggregate {
    std::vector<double> mean_cum_regret;
    std::vector<double> stderr_cum_regret;
    std::vector<double> mean_value;
    std::vector<double> stderr_value;
    std::vector<double> final_values;  // one per seed
    MeanStderr final_value;
};

/// Throws ContractError when runs are empty or have different lengths.
Aggregate aggregate(const std::vector<SeedRun>& runs);

struct WelchResult {
    double t;
    double dof;
};

/// Welch's unequal-variance t statistic for mean(a) - mean(b); nullopt
/// when both samples have zero variance or fewer than two points.
std::optional<WelchResult> welch_t(const std::vector<double>& a, const std::vector<double>& b);

void write_csv(std::ostream& os, const std::vector<SeedRun>& runs);
std::vector<SeedRun> read_csv(std::istream& is);
nlohmann::json to_json(const std::vector<SeedRun>& runs);
std::vector<SeedRun> runs_from_json(const nlohmann::json& j);

/// Throws std::runtime_error with the path on I/O failure.
void export_results(const std::vector<SeedRun>& runs, const std::string& path, ExportFormat format);
std::vector<SeedRun> import_results(const std::string& path, ExportFormat format);

/// One row of the inventory comparison: final-episode cost over seeds.
struct Table2Row {
    std::string algorithm;
    MeanStderr cost;
    std::vector<double> finals;
};

struct Table2Options {
    int episodes = 1000;
    int seeds = 20;
    int threads = 0;
    double ucrl_bonus_scale = 0.0;  // 0: use the tuned default
    double q_bonus_scale = 0.0;
};

/// Optimal, best base-stock, Random, QLearning, UCRL-VTR, PlugIn and
/// OnlineBaseStock on one inventory scenario.
std::vector<Table2Row> run_table2(const std::string& scenario, const Table2Options& options);

/// Default confidence-radius multipliers chosen from the 2^-5..2^5 grid.
inline constexpr double kDefaultUcrlBonusScale = 1.0 / 32.0;
inline constexpr double kDefaultQBonusScale = 1.0 / 32.0;

}  // namespace exo
