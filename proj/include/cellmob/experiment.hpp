#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellmob/simulation.hpp"

namespace cellmob {

struct Diagnostic {
    std::string path;  // JSON pointer, or line reference for parse errors
    std::string message;
};

struct ConfigError : std::runtime_error {
    std::vector<Diagnostic> diagnostics;
    explicit ConfigError(std::vector<Diagnostic> diags);
};

struct SweepSpec {
    std::string variable = "velocity";
    std::vector<double> grid;
};

struct DeploymentEntry {
    std::string name;
    DeploymentSpec spec;
    AssociationPolicy policy;
};

struct ExperimentConfig {
    std::string scenario;  // fig_rate_comparison | fig_rate_vs_prob_low_v |
                           // fig_prob_single_vs_multi | custom
    std::string metric;    // custom only: handoff_rate | handoff_prob | sojourn
    std::vector<DeploymentEntry> deployments;
    std::optional<ModelConfig> mobility;
    SweepSpec sweep;
    ReplicationPlan plan;
    QuadratureSpec quad;
    double assert_threshold = 0.10;  // relative analytic/simulated gap tripping exit 3
    std::string output_dir = "out";
    double rate_seconds_per_point = 10000.0;
    std::uint64_t rate_replications = 40;
    double sojourn_T = 5.0;
    nlohmann::json raw;  // original document (digest, reproducibility)
};

// Full schema check; returns all problems found (empty = valid).
std::vector<Diagnostic> validate_config_json(const nlohmann::json& j);
// Parse error diagnostics carry a line reference computed from the source text.
std::vector<Diagnostic> validate_config_text(const std::string& text);

ExperimentConfig parse_config(const nlohmann::json& j);  // throws ConfigError

struct ResultRow {
    std::string label;  // deployment or series name
    double sweep_value = 0.0;
    std::optional<double> analytic;
    std::optional<Estimate> simulated;
    std::optional<double> rel_gap;
    std::vector<std::pair<std::string, double>> extras;  // scenario-specific columns
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    nlohmann::json summary;
    std::string csv;
    bool gap_exceeded = false;
    double runtime_seconds = 0.0;
};

// Runs the configured scenario and, when output_dir is nonempty, writes
// table.csv and summary.json under it. Deterministic given the plan seeds.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Bundled figure scenarios, also shipped under configs/.
nlohmann::json builtin_figure_config(const std::string& name);

}  // namespace cellmob
