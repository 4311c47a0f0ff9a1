#include "exo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "exo/base_stock.hpp"
#include "exo/plug_in.hpp"
#include "exo/q_learning.hpp"
#include "exo/ucrl_vtr.hpp"

namespace exo {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// JSON field access with ConfigError on type mismatch
// ---------------------------------------------------------------------------

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) config_fail(where, "expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) config_fail(where + "." + key, "unknown key");
    }
}

int get_int(const json& j, const std::string& key, int fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) config_fail(where + "." + key, "expected an integer");
    return v.get<int>();
}

double get_double(const json& j, const std::string& key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) config_fail(where + "." + key, "expected a number");
    return v.get<double>();
}

bool get_bool(const json& j, const std::string& key, bool fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) config_fail(where + "." + key, "expected true or false");
    return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback,
                       const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) config_fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

std::vector<int> int_list(const json& v, const std::string& where) {
    if (!v.is_array()) config_fail(where, "expected an array");
    std::vector<int> out;
    for (const json& x : v) {
        if (!x.is_number_integer()) config_fail(where, "expected integers");
        out.push_back(x.get<int>());
    }
    return out;
}

CostNormalization cost_normalization(const json& j, const std::string& where) {
    const std::string mode = get_string(j, "cost_normalization", "raw", where);
    if (mode == "raw") return CostNormalization::Raw;
    if (mode == "max") return CostNormalization::MaxNormalized;
    config_fail(where + ".cost_normalization", "expected \"raw\" or \"max\"");
}

const std::set<std::string> kAlgorithms = {"ucrl_vtr", "plug_in",          "q_learning", "random",
                                           "optimal",  "online_base_stock", "base_stock"};

}  // namespace

// ---------------------------------------------------------------------------
// Environments and learners
// ---------------------------------------------------------------------------

Environment make_environment(const json& spec, int default_episodes) {
    const std::string where = "environment";
    if (!spec.is_object()) config_fail(where, "expected an object");
    const std::string name = get_string(spec, "name", "", where);
    try {
        if (name == "scenario_1" || name == "scenario_2" || name == "scenario_3") {
            check_keys(spec, where, {"name", "cost_normalization"});
            InventoryParams p = scenario_params(name);
            p.cost_normalization = cost_normalization(spec, where);
            InventoryModel model = make_inventory(p);
            return {name, model.mdp(), model};
        }
        if (name == "toy_newsvendor") {
            check_keys(spec, where, {"name", "cost_normalization"});
            InventoryParams p = toy_params();
            p.cost_normalization = cost_normalization(spec, where);
            InventoryModel model = make_inventory(p);
            return {name, model.mdp(), model};
        }
        if (name == "inventory") {
            check_keys(spec, where,
                       {"name", "horizon", "lead_time", "holding_cost", "lost_sales_penalty",
                        "demand_support", "poisson_rate", "demand_dist", "cost_normalization",
                        "state_cap"});
            InventoryParams p;
            p.horizon = get_int(spec, "horizon", 10, where);
            p.lead_time = get_int(spec, "lead_time", 0, where);
            p.holding_cost = get_double(spec, "holding_cost", 1.0, where);
            p.lost_sales_penalty = get_double(spec, "lost_sales_penalty", 1.0, where);
            p.demand_support = get_int(spec, "demand_support", 4, where);
            p.cost_normalization = cost_normalization(spec, where);
            p.state_cap = get_int(spec, "state_cap", static_cast<int>(p.state_cap), where);
            if (spec.contains("demand_dist")) {
                if (spec.contains("poisson_rate")) {
                    config_fail(where, "give either demand_dist or poisson_rate, not both");
                }
                const json& dist = spec.at("demand_dist");
                if (!dist.is_array()) config_fail(where + ".demand_dist", "expected an array");
                std::vector<double> probs;
                for (const json& x : dist) {
                    if (!x.is_number()) config_fail(where + ".demand_dist", "expected numbers");
                    probs.push_back(x.get<double>());
                }
                p.demand_dist = ProbVec(std::move(probs));
            } else {
                p.demand_dist =
                    truncated_poisson(get_double(spec, "poisson_rate", 2.0, where), p.demand_support);
            }
            InventoryModel model = make_inventory(p);
            return {name, model.mdp(), model};
        }
        if (name == "circle_toy") {
            check_keys(spec, where, {"name", "horizon", "n_circle", "base", "amp", "tilt", "phi"});
            CircleToyParams p;
            p.horizon = get_int(spec, "horizon", p.horizon, where);
            p.n_circle = get_int(spec, "n_circle", p.n_circle, where);
            p.base = get_double(spec, "base", p.base, where);
            p.amp = get_double(spec, "amp", p.amp, where);
            p.tilt = get_double(spec, "tilt", p.tilt, where);
            p.phi = get_double(spec, "phi", p.phi, where);
            return {name, make_circle_toy(p), std::nullopt};
        }
        if (name == "infection") {
            check_keys(spec, where, {"name", "p0", "p1", "p2", "horizon"});
            return {name,
                    make_infection(get_double(spec, "p0", 0.3, where),
                                   get_double(spec, "p1", 0.1, where),
                                   get_double(spec, "p2", 0.4, where),
                                   get_int(spec, "horizon", 10, where)),
                    std::nullopt};
        }
        if (name == "exo_bandit" || name == "hard_stationary" || name == "hard_nonstationary") {
            check_keys(spec, where, {"name", "d", "K", "horizon", "z_tilde"});
            HardInstanceParams p;
            p.d = get_int(spec, "d", 4, where);
            p.episodes = get_int(spec, "K", default_episodes, where);
            p.horizon = name == "exo_bandit" ? 1 : get_int(spec, "horizon", 4, where);
            const std::size_t vectors =
                name == "hard_nonstationary" ? static_cast<std::size_t>(std::max(p.horizon / 2, 0)) : 1;
            if (spec.contains("z_tilde")) {
                const json& z = spec.at("z_tilde");
                if (name == "hard_nonstationary") {
                    if (!z.is_array()) config_fail(where + ".z_tilde", "expected an array of arrays");
                    for (const json& row : z) p.z_tilde.push_back(int_list(row, where + ".z_tilde"));
                } else {
                    p.z_tilde.push_back(int_list(z, where + ".z_tilde"));
                }
            } else {
                p.z_tilde.assign(vectors, std::vector<int>(static_cast<std::size_t>(std::max(p.d / 2, 0)), 1));
            }
            if (name == "exo_bandit") return {name, make_exo_bandit(p), std::nullopt};
            if (name == "hard_stationary") return {name, make_hard_stationary(p), std::nullopt};
            return {name, make_hard_nonstationary(p), std::nullopt};
        }
    } catch (const ContractError& e) {
        config_fail(where, e.what());
    }
    config_fail(where + ".name", "unknown environment '" + name + "'");
}

std::unique_ptr<Learner> make_learner(const std::string& algorithm, const json& hyper,
                                      const Environment& env, int episodes) {
    const std::string where = "algorithm";
    const ExoMdp structure = env.mdp.structure_only();
    try {
        if (algorithm == "random") {
            check_keys(hyper, where, {});
            return std::make_unique<RandomLearner>(env.mdp.horizon(), env.mdp.n_states(),
                                                   env.mdp.n_actions());
        }
        if (algorithm == "optimal") {
            check_keys(hyper, where, {});
            return std::make_unique<FixedPolicyLearner>("optimal", dp_solve(env.mdp).policy);
        }
        if (algorithm == "ucrl_vtr") {
            check_keys(hyper, where,
                       {"bonus_scale", "delta", "norm_bound", "known_rewards", "rank_reduction",
                        "clip_remaining", "optimistic_ties"});
            UcrlVtrConfig c;
            c.bonus_scale = get_double(hyper, "bonus_scale", c.bonus_scale, where);
            c.delta = get_double(hyper, "delta", c.delta, where);
            c.norm_bound = get_double(hyper, "norm_bound", c.norm_bound, where);
            c.known_rewards = get_bool(hyper, "known_rewards", c.known_rewards, where);
            c.rank_reduction = get_bool(hyper, "rank_reduction", c.rank_reduction, where);
            c.clip_remaining = get_bool(hyper, "clip_remaining", c.clip_remaining, where);
            c.optimistic_ties = get_bool(hyper, "optimistic_ties", c.optimistic_ties, where);
            std::optional<std::vector<double>> rewards;
            if (c.known_rewards) rewards = expected_reward_table(env.mdp, env.mdp.schedule());
            return std::make_unique<UcrlVtr>(structure, c, std::move(rewards));
        }
        if (algorithm == "plug_in") {
            check_keys(hyper, where, {});
            return std::make_unique<PlugIn>(structure);
        }
        if (algorithm == "q_learning") {
            check_keys(hyper, where, {"bonus_scale", "delta"});
            QLearningConfig c;
            c.bonus_scale = get_double(hyper, "bonus_scale", c.bonus_scale, where);
            c.delta = get_double(hyper, "delta", c.delta, where);
            c.planned_episodes = episodes;
            return std::make_unique<QLearning>(env.mdp.horizon(), env.mdp.n_states(),
                                               env.mdp.n_actions(), c);
        }
        if (algorithm == "online_base_stock" || algorithm == "base_stock") {
            if (!env.inventory) config_fail(where, algorithm + " needs an inventory environment");
            if (algorithm == "online_base_stock") {
                check_keys(hyper, where, {});
                return std::make_unique<OnlineBaseStock>(*env.inventory, episodes);
            }
            check_keys(hyper, where, {"level"});
            const double level = get_double(hyper, "level", 0.0, where);
            return std::make_unique<FixedPolicyLearner>("base_stock",
                                                        base_stock_policy(*env.inventory, level));
        }
    } catch (const ContractError& e) {
        config_fail(where, e.what());
    }
    config_fail(where + ".name", "unknown algorithm '" + algorithm + "'");
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const json& j) {
    check_keys(j, "config",
               {"environment", "algorithm", "episodes", "seeds", "observation_mode", "output",
                "threads", "experiment_id"});
    ExperimentConfig c;
    if (!j.contains("environment")) config_fail("environment", "missing");
    c.environment = j.at("environment");
    if (!c.environment.is_object() || !c.environment.contains("name")) {
        config_fail("environment", "expected an object with a name");
    }

    if (!j.contains("algorithm")) config_fail("algorithm", "missing");
    const json& alg = j.at("algorithm");
    if (alg.is_string()) {
        c.algorithm = alg.get<std::string>();
    } else if (alg.is_object()) {
        c.algorithm = get_string(alg, "name", "", "algorithm");
        c.hyperparameters = alg;
        c.hyperparameters.erase("name");
    } else {
        config_fail("algorithm", "expected a name or an object with a name");
    }

    c.episodes = get_int(j, "episodes", 0, "config");
    if (!j.contains("seeds")) {
        for (std::uint64_t s = 0; s < 100; ++s) c.seeds.push_back(s);
    } else {
        const json& seeds = j.at("seeds");
        if (seeds.is_array()) {
            for (const json& s : seeds) {
                if (!s.is_number_integer() || s.get<std::int64_t>() < 0) {
                    config_fail("seeds", "expected non-negative integers");
                }
                c.seeds.push_back(s.get<std::uint64_t>());
            }
        } else if (seeds.is_object()) {
            check_keys(seeds, "seeds", {"count", "first"});
            const int count = get_int(seeds, "count", 0, "seeds");
            const int first = get_int(seeds, "first", 0, "seeds");
            if (count < 0 || first < 0) config_fail("seeds", "count and first must be >= 0");
            for (int s = 0; s < count; ++s) c.seeds.push_back(static_cast<std::uint64_t>(first + s));
        } else {
            config_fail("seeds", "expected an array or {\"count\": N}");
        }
    }

    const std::string mode = get_string(j, "observation_mode", "none", "config");
    if (mode == "full") {
        c.mode = ObservationMode::Full;
    } else if (mode == "none") {
        c.mode = ObservationMode::None;
    } else {
        config_fail("observation_mode", "expected \"full\" or \"none\"");
    }

    if (j.contains("output")) {
        const json& out = j.at("output");
        check_keys(out, "output", {"path", "format"});
        c.output_path = get_string(out, "path", "", "output");
        const std::string format = get_string(out, "format", "csv", "output");
        if (format == "csv") {
            c.format = ExportFormat::Csv;
        } else if (format == "json") {
            c.format = ExportFormat::Json;
        } else {
            config_fail("output.format", "expected \"csv\" or \"json\"");
        }
    }
    c.threads = get_int(j, "threads", 0, "config");
    if (j.contains("experiment_id")) {
        const json& id = j.at("experiment_id");
        if (!id.is_number_integer() || id.get<std::int64_t>() < 0) {
            config_fail("experiment_id", "expected a non-negative integer");
        }
        c.experiment_id = j.at("experiment_id").get<std::uint64_t>();
    }
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

void validate_config(const ExperimentConfig& c) {
    if (c.episodes < 1) config_fail("episodes", "must be >= 1");
    if (c.seeds.empty()) config_fail("seeds", "at least one seed is required");
    if (c.threads < 0) config_fail("threads", "must be >= 0");
    if (!kAlgorithms.count(c.algorithm)) {
        config_fail("algorithm", "unknown algorithm '" + c.algorithm + "'");
    }
    if (c.algorithm == "plug_in" && c.mode != ObservationMode::Full) {
        config_fail("observation_mode", "plug_in needs \"full\" observation of the exogenous draws");
    }
    const std::string env = c.environment.value("name", "");
    const bool inventory = env.rfind("scenario_", 0) == 0 || env == "inventory" || env == "toy_newsvendor";
    if ((c.algorithm == "online_base_stock" || c.algorithm == "base_stock") && !inventory) {
        config_fail("algorithm", c.algorithm + " needs an inventory environment");
    }
    if (c.algorithm == "plug_in" && env == "hard_nonstationary") {
        config_fail("algorithm", "plug_in assumes a time-homogeneous exogenous process");
    }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

std::vector<RegretRecord> regret_records(const Environment& env, double optimal_value,
                                         const std::vector<EpisodeOutcome>& outcomes) {
    std::vector<RegretRecord> out;
    out.reserve(outcomes.size());
    const double best = env.report(optimal_value);
    double cum = 0.0;
    for (const EpisodeOutcome& o : outcomes) {
        const double value = env.report(o.value);
        const double inst = env.is_cost() ? value - best : best - value;
        cum += inst;
        out.push_back({o.episode, value, inst, cum, o.seconds});
    }
    return out;
}

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    const Environment env = make_environment(config.environment, config.episodes);
    const double optimum = dp_solve(env.mdp).values.at(0, env.mdp.start_state());
    // Fail on bad hyperparameters before fanning out.
    make_learner(config.algorithm, config.hyperparameters, env, config.episodes);

    ExperimentResult result;
    result.environment = env.name;
    result.algorithm = config.algorithm;
    result.cost = env.is_cost();
    result.optimum = env.report(optimum);
    result.runs.resize(config.seeds.size());
    parallel_for(config.seeds.size(), config.threads, [&](std::size_t i) {
        const std::uint64_t seed = config.seeds[i];
        auto learner = make_learner(config.algorithm, config.hyperparameters, env, config.episodes);
        const auto outcomes = run_learner(env.mdp, *learner, config.episodes, config.mode,
                                          config.experiment_id, seed);
        result.runs[i] = {seed, regret_records(env, optimum, outcomes)};
    });
    if (!config.output_path.empty()) export_results(result.runs, config.output_path, config.format);
    return result;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

MeanStderr mean_stderr(const std::vector<double>& xs) {
    if (xs.empty()) throw ContractError("mean_stderr: empty sample");
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Aggregate aggregate(const std::vector<SeedRun>& runs) {
    if (runs.empty()) throw ContractError("aggregate: no runs");
    const std::size_t K = runs.front().records.size();
    for (const SeedRun& r : runs) {
        if (r.records.size() != K) throw ContractError("aggregate: runs have different lengths");
    }
    if (K == 0) throw ContractError("aggregate: runs have no episodes");
    Aggregate agg;
    std::vector<double> col(runs.size());
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < runs.size(); ++i) col[i] = runs[i].records[k].cum_regret;
        const MeanStderr c = mean_stderr(col);
        agg.mean_cum_regret.push_back(c.mean);
        agg.stderr_cum_regret.push_back(c.stderr_);
        for (std::size_t i = 0; i < runs.size(); ++i) col[i] = runs[i].records[k].value;
        const MeanStderr v = mean_stderr(col);
        agg.mean_value.push_back(v.mean);
        agg.stderr_value.push_back(v.stderr_);
    }
    agg.final_values = col;
    agg.final_value = mean_stderr(col);
    return agg;
}

std::optional<WelchResult> welch_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) return std::nullopt;
    auto moments = [](const std::vector<double>& xs) {
        const double n = static_cast<double>(xs.size());
        double m = 0.0;
        for (double x : xs) m += x;
        m /= n;
        double ss = 0.0;
        for (double x : xs) ss += (x - m) * (x - m);
        return std::pair{m, ss / (n - 1.0)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double qa = va / static_cast<double>(a.size());
    const double qb = vb / static_cast<double>(b.size());
    if (qa + qb <= 0.0) return std::nullopt;
    const double t = (ma - mb) / std::sqrt(qa + qb);
    const double dof = (qa + qb) * (qa + qb) /
                       (qa * qa / (static_cast<double>(a.size()) - 1.0) +
                        qb * qb / (static_cast<double>(b.size()) - 1.0));
    return WelchResult{t, dof};
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader = "seed,episode,value,inst_regret,cum_regret";

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s, std::size_t line) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) {
        throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return x;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<SeedRun>& runs) {
    os << kCsvHeader << '\n';
    for (const SeedRun& run : runs) {
        for (const RegretRecord& r : run.records) {
            os << run.seed << ',' << r.episode << ',' << format_double(r.value) << ','
               << format_double(r.inst_regret) << ',' << format_double(r.cum_regret) << '\n';
        }
    }
}

std::vector<SeedRun> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) {
        throw std::runtime_error("missing or unexpected CSV header");
    }
    std::vector<SeedRun> runs;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected 5 columns");
        }
        const auto seed = static_cast<std::uint64_t>(std::stoull(cells[0]));
        if (runs.empty() || runs.back().seed != seed) runs.push_back({seed, {}});
        runs.back().records.push_back({std::stoi(cells[1]), parse_double(cells[2], line_no),
                                       parse_double(cells[3], line_no),
                                       parse_double(cells[4], line_no), 0.0});
    }
    return runs;
}

json to_json(const std::vector<SeedRun>& runs) {
    json rows = json::array();
    for (const SeedRun& run : runs) {
        for (const RegretRecord& r : run.records) {
            rows.push_back({{"seed", run.seed},
                            {"episode", r.episode},
                            {"value", r.value},
                            {"inst_regret", r.inst_regret},
                            {"cum_regret", r.cum_regret}});
        }
    }
    return rows;
}

std::vector<SeedRun> runs_from_json(const json& j) {
    if (!j.is_array()) throw std::runtime_error("expected a JSON array of records");
    std::vector<SeedRun> runs;
    for (const json& row : j) {
        const auto seed = row.at("seed").get<std::uint64_t>();
        if (runs.empty() || runs.back().seed != seed) runs.push_back({seed, {}});
        runs.back().records.push_back({row.at("episode").get<int>(), row.at("value").get<double>(),
                                       row.at("inst_regret").get<double>(),
                                       row.at("cum_regret").get<double>(), 0.0});
    }
    return runs;
}

void export_results(const std::vector<SeedRun>& runs, const std::string& path, ExportFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    if (format == ExportFormat::Csv) {
        write_csv(out, runs);
    } else {
        out << to_json(runs).dump(1) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<SeedRun> import_results(const std::string& path, ExportFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    try {
        if (format == ExportFormat::Csv) return read_csv(in);
        json j;
        in >> j;
        return runs_from_json(j);
    } catch (const std::exception& e) {
        throw std::runtime_error("'" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Inventory comparison
// ---------------------------------------------------------------------------

std::vector<Table2Row> run_table2(const std::string& scenario, const Table2Options& options) {
    if (options.episodes < 1 || options.seeds < 1) {
        throw ContractError("run_table2: need episodes >= 1 and seeds >= 1");
    }
    const InventoryModel model = make_inventory(scenario_params(scenario));
    const Environment env{"scenario_" + scenario, model.mdp(), model};
    const double optimum = dp_solve(env.mdp).values.at(0, env.mdp.start_state());
    const auto replicate = [&](double value) {
        return std::vector<double>(static_cast<std::size_t>(options.seeds), env.report(value));
    };

    std::vector<Table2Row> rows;
    rows.push_back({"Optimal", {}, replicate(optimum)});
    rows.push_back({"BestBaseStock", {}, replicate(best_base_stock(model).value)});
    // The uniform policy never changes, so its final cost is exact.
    rows.push_back({"Random", {},
                    replicate(policy_value(env.mdp, env.mdp.schedule(),
                                           StochasticPolicy::uniform(env.mdp.horizon(),
                                                                     env.mdp.n_states(),
                                                                     env.mdp.n_actions())))});

    struct Learned {
        std::string label;
        std::string algorithm;
        json hyper;
        ObservationMode mode;
    };
    const double ucrl_scale =
        options.ucrl_bonus_scale > 0.0 ? options.ucrl_bonus_scale : kDefaultUcrlBonusScale;
    const double q_scale = options.q_bonus_scale > 0.0 ? options.q_bonus_scale : kDefaultQBonusScale;
    const std::vector<Learned> learned = {
        {"QLearning", "q_learning", {{"bonus_scale", q_scale}}, ObservationMode::None},
        {"UCRL-VTR", "ucrl_vtr", {{"bonus_scale", ucrl_scale}, {"optimistic_ties", true}},
         ObservationMode::None},
        {"PlugIn", "plug_in", json::object(), ObservationMode::Full},
        {"OnlineBaseStock", "online_base_stock", json::object(), ObservationMode::None},
    };
    const std::size_t S = static_cast<std::size_t>(options.seeds);
    std::vector<std::vector<double>> finals(learned.size(), std::vector<double>(S));
    parallel_for(learned.size() * S, options.threads, [&](std::size_t job) {
        const Learned& l = learned[job / S];
        const std::uint64_t seed = job % S;
        auto learner = make_learner(l.algorithm, l.hyper, env, options.episodes);
        const auto outcomes = run_learner(env.mdp, *learner, options.episodes, l.mode,
                                          /*experiment=*/2, seed);
        finals[job / S][job % S] = env.report(outcomes.back().value);
    });
    for (std::size_t i = 0; i < learned.size(); ++i) {
        rows.push_back({learned[i].label, {}, finals[i]});
    }
    for (Table2Row& row : rows) row.cost = mean_stderr(row.finals);
    return rows;
}

}  // namespace exo
