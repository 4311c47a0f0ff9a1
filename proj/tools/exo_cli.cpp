// exo: command-line front end for the Exo-MDP workbench.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "exo/base_stock.hpp"
#include "exo/harness.hpp"
#include "exo/linear_mixture.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path output_dir() {
    const char* dir = std::getenv("EXO_OUTPUT_DIR");
    return dir && *dir ? fs::path(dir) : fs::path(".");
}

exo::ExportFormat parse_format(const std::string& s) {
    return s == "json" ? exo::ExportFormat::Json : exo::ExportFormat::Csv;
}

const char* extension(exo::ExportFormat f) { return f == exo::ExportFormat::Json ? "json" : "csv"; }

json env_spec(const std::string& name, const std::string& params) {
    json spec = params.empty() ? json::object() : json::parse(params);
    if (!spec.is_object()) throw exo::ConfigError("--params must be a JSON object");
    spec["name"] = name;
    return spec;
}

int cmd_run(const std::string& config_path, const std::string& format_override,
            const std::string& output_override) {
    exo::ExperimentConfig config = exo::load_config(config_path);
    if (!format_override.empty()) config.format = parse_format(format_override);
    if (!output_override.empty()) {
        config.output_path = output_override;
    } else if (config.output_path.empty()) {
        config.output_path = (output_dir() / (fs::path(config_path).stem().string() + "." +
                                              extension(config.format)))
                                 .string();
    } else if (fs::path(config.output_path).is_relative()) {
        config.output_path = (output_dir() / config.output_path).string();
    }
    const exo::ExperimentResult result = exo::run_experiment(config);
    const exo::Aggregate agg = exo::aggregate(result.runs);
    std::printf("environment      %s\n", result.environment.c_str());
    std::printf("algorithm        %s\n", result.algorithm.c_str());
    std::printf("episodes         %d\n", config.episodes);
    std::printf("seeds            %zu\n", result.runs.size());
    std::printf("%-16s %.6f\n", result.cost ? "optimal cost" : "optimal value", result.optimum);
    std::printf("%-16s %.6f +- %.6f\n", result.cost ? "final cost" : "final value",
                agg.final_value.mean, agg.final_value.stderr_);
    std::printf("cum regret       %.6f +- %.6f\n", agg.mean_cum_regret.back(),
                agg.stderr_cum_regret.back());
    std::printf("written          %s\n", config.output_path.c_str());
    return 0;
}

int cmd_rank(const std::string& name, const std::string& params, const std::string& export_path) {
    const exo::Environment env = exo::make_environment(env_spec(name, params));
    const exo::FeatureSet features = exo::build_features(env.mdp);
    const exo::InfoMatrix info = exo::build_info_matrix(features);
    std::printf("d                %d\n", env.mdp.n_exo());
    std::printf("rows             %lld (%lld non-zero)\n", static_cast<long long>(info.total_rows),
                static_cast<long long>(info.rows.rows()));
    std::printf("singular values ");
    for (Eigen::Index i = 0; i < info.singular_values.size(); ++i) {
        std::printf(" %.6g", info.singular_values(i));
    }
    std::printf("\nrank             %d\n", info.rank);
    if (info.rows.rows() <= 64) {
        for (Eigen::Index i = 0; i < info.rows.rows(); ++i) {
            const exo::InfoRowKey& k = info.keys[static_cast<std::size_t>(i)];
            std::printf("  (s=%d, a=%d, s'=%d) ", k.state, k.action, k.next_state);
            for (Eigen::Index j = 0; j < info.rows.cols(); ++j) {
                std::printf(" %g", info.rows(i, j));
            }
            std::printf("\n");
        }
    }
    if (!export_path.empty()) {
        fs::path path = export_path;
        if (path.is_relative()) path = output_dir() / path;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        out << "kind,state,action,next_state";
        for (int j = 0; j < env.mdp.n_exo(); ++j) out << ",x" << j;
        out << '\n';
        for (Eigen::Index i = 0; i < info.rows.rows(); ++i) {
            const exo::InfoRowKey& k = info.keys[static_cast<std::size_t>(i)];
            out << "row," << k.state << ',' << k.action << ',' << k.next_state;
            for (Eigen::Index j = 0; j < info.rows.cols(); ++j) out << ',' << info.rows(i, j);
            out << '\n';
        }
        out.precision(17);
        out << "singular,,,";
        for (Eigen::Index i = 0; i < info.singular_values.size(); ++i) {
            out << ',' << info.singular_values(i);
        }
        out << "\nrank,,,," << info.rank << '\n';
        std::printf("written          %s\n", path.string().c_str());
    }
    return 0;
}

int cmd_solve(const std::string& name, const std::string& params) {
    const exo::Environment env = exo::make_environment(env_spec(name, params));
    const exo::Solution sol = exo::dp_solve(env.mdp);
    const double v = sol.values.at(0, env.mdp.start_state());
    std::printf("states           %d\n", env.mdp.n_states());
    std::printf("actions          %d\n", env.mdp.n_actions());
    std::printf("horizon          %d\n", env.mdp.horizon());
    std::printf("optimal value    %.9f\n", v);
    if (env.inventory) {
        std::printf("optimal cost     %.6f (raw)  %.6f (max-normalized)\n",
                    env.inventory->total_cost(v, exo::CostNormalization::Raw),
                    env.inventory->total_cost(v, exo::CostNormalization::MaxNormalized));
        const exo::BaseStockLevel best = exo::best_base_stock(*env.inventory);
        std::printf("best base-stock  b=%d cost %.6f\n", best.level, env.report(best.value));
    }
    if (env.mdp.n_states() <= 16) {
        for (int t = 0; t < env.mdp.horizon(); ++t) {
            std::printf("  stage %d:", t);
            for (int s = 0; s < env.mdp.n_states(); ++s) {
                std::printf(" %d", sol.policy.action(t, s));
            }
            std::printf("\n");
        }
    } else {
        std::printf("first action     %d\n", sol.policy.action(0, env.mdp.start_state()));
    }
    return 0;
}

int cmd_table2(const std::string& scenarios, int episodes, int seeds, int threads,
               const std::string& format) {
    exo::Table2Options options;
    options.episodes = episodes;
    options.seeds = seeds;
    options.threads = threads;
    json out = json::array();
    std::stringstream list(scenarios);
    std::string scenario;
    while (std::getline(list, scenario, ',')) {
        const auto rows = exo::run_table2(scenario, options);
        std::printf("Scenario %s (K=%d, %d seeds, total cost at the final episode)\n",
                    scenario.c_str(), episodes, seeds);
        for (const auto& row : rows) {
            std::printf("  %-16s %10.3f +- %.3f\n", row.algorithm.c_str(), row.cost.mean,
                        row.cost.stderr_);
            out.push_back({{"scenario", scenario},
                           {"algorithm", row.algorithm},
                           {"mean", row.cost.mean},
                           {"stderr", row.cost.stderr_}});
        }
    }
    const exo::ExportFormat fmt = parse_format(format);
    const fs::path path = output_dir() / (std::string("table2.") + extension(fmt));
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    if (fmt == exo::ExportFormat::Json) {
        file << out.dump(1) << '\n';
    } else {
        file << "scenario,algorithm,mean,stderr\n";
        char buf[64];
        for (const json& r : out) {
            file << r["scenario"].get<std::string>() << ',' << r["algorithm"].get<std::string>();
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", r["mean"].get<double>(),
                          r["stderr"].get<double>());
            file << buf;
        }
    }
    std::printf("written %s\n", path.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exo-MDP workbench"};
    app.require_subcommand(1);

    std::string config_path;
    std::string format;
    std::string output;
    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--format", format, "Export format")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--output", output, "Export path (default: $EXO_OUTPUT_DIR/<config>.<fmt>)");

    std::string env_name;
    std::string params;
    std::string export_path;
    auto* rank = app.add_subcommand("rank", "Information matrix, singular values, effective rank");
    rank->add_option("env", env_name, "Environment name")->required();
    rank->add_option("--params", params, "Environment parameters as a JSON object");
    rank->add_option("--export", export_path, "Write F, singular values and rank as CSV");

    auto* solve = app.add_subcommand("solve", "DP-optimal value and policy");
    solve->add_option("env", env_name, "Environment name")->required();
    solve->add_option("--params", params, "Environment parameters as a JSON object");

    std::string scenarios = "I,II,III";
    int episodes = 1000;
    int seeds = 20;
    int threads = 0;
    std::string table_format = "csv";
    auto* table2 = app.add_subcommand("table2", "Inventory comparison of all algorithms");
    table2->add_option("--scenarios", scenarios, "Comma-separated scenario names");
    table2->add_option("--episodes", episodes, "Episodes K")->check(CLI::PositiveNumber);
    table2->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
    table2->add_option("--threads", threads, "Worker threads (0: all cores)");
    table2->add_option("--format", table_format, "Export format")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config_path, format, output);
        if (*rank) return cmd_rank(env_name, params, export_path);
        if (*solve) return cmd_solve(env_name, params);
        if (*table2) return cmd_table2(scenarios, episodes, seeds, threads, table_format);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
