#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellmob/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitAssertGap = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int resolve_workers(int cli_workers) {
    if (cli_workers >= 0) return cli_workers;
    if (const char* env = std::getenv("CELLMOB_WORKERS")) return std::atoi(env);
    return -1;  // leave config value
}

int run_config(nlohmann::json doc, const std::string& out_dir, long long seed, int workers) {
    using namespace cellmob;
    if (!out_dir.empty()) doc["output"] = out_dir;
    if (seed >= 0) doc["plan"]["base_seed"] = static_cast<std::uint64_t>(seed);
    const int w = resolve_workers(workers);
    if (w >= 0) doc["plan"]["parallel_width"] = w;

    ExperimentConfig cfg;
    try {
        cfg = parse_config(doc);
    } catch (const ConfigError& e) {
        for (const auto& d : e.diagnostics)
            std::cerr << "error: " << d.path << ": " << d.message << "\n";
        return kExitValidation;
    }
    try {
        const ExperimentResult res = run_experiment(cfg);
        std::cout << res.csv;
        std::cerr << "wrote " << cfg.output_dir << "/table.csv and summary.json"
                  << " (max relative gap " << res.summary["max_rel_gap"].get<double>()
                  << ", " << res.runtime_seconds << " s)\n";
        if (res.gap_exceeded) {
            std::cerr << "assertion gap exceeded threshold " << cfg.assert_threshold << "\n";
            return kExitAssertGap;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        for (const auto& d : e.diagnostics)
            std::cerr << "error: " << d.path << ": " << d.message << "\n";
        return kExitValidation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cellmob: handoff/coverage/sojourn analysis of cellular deployments "
                 "with Monte Carlo cross-validation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, figure_name;
    long long seed = -1;
    int workers = -1;

    CLI::App* validate = app.add_subcommand("validate", "schema-check an experiment config");
    validate->add_option("config", config_path, "JSON experiment config")->required();

    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_dir, "output directory override");
    run->add_option("--seed", seed, "base seed override");
    run->add_option("--workers", workers, "worker count override (also CELLMOB_WORKERS)");

    CLI::App* figure = app.add_subcommand("figure", "run a bundled figure scenario");
    figure
        ->add_option("name", figure_name,
                     "fig_rate_comparison | fig_rate_vs_prob_low_v | fig_prob_single_vs_multi")
        ->required();
    figure->add_option("--out", out_dir, "output directory override");
    figure->add_option("--seed", seed, "base seed override");
    figure->add_option("--workers", workers, "worker count override (also CELLMOB_WORKERS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) {
            const auto diags = cellmob::validate_config_text(read_file(config_path));
            for (const auto& d : diags)
                std::cout << config_path << ": " << d.path << ": " << d.message << "\n";
            if (diags.empty()) {
                std::cout << config_path << ": OK\n";
                return kExitOk;
            }
            return kExitValidation;
        }
        if (run->parsed()) {
            const std::string text = read_file(config_path);
            const auto diags = cellmob::validate_config_text(text);
            if (!diags.empty()) {
                for (const auto& d : diags)
                    std::cerr << "error: " << d.path << ": " << d.message << "\n";
                return kExitValidation;
            }
            return run_config(nlohmann::json::parse(text), out_dir, seed, workers);
        }
        if (figure->parsed())
            return run_config(cellmob::builtin_figure_config(figure_name), out_dir, seed,
                              workers);
    } catch (const cellmob::ConfigError& e) {
        for (const auto& d : e.diagnostics)
            std::cerr << "error: " << d.path << ": " << d.message << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
