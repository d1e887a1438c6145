#include "cellmob/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cellmob/boundary.hpp"

namespace cellmob {

namespace {

constexpr double kPi = std::numbers::pi;

std::string join_diags(const std::vector<Diagnostic>& diags) {
    std::string s = "config invalid:";
    for (const Diagnostic& d : diags) s += "\n  " + d.path + ": " + d.message;
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_diags(diags)), diagnostics(std::move(diags)) {}

// ---- validation ---------------------------------------------------------------

namespace {

struct Checker {
    std::vector<Diagnostic> diags;

    void err(const std::string& path, const std::string& msg) { diags.push_back({path, msg}); }

    const nlohmann::json* field(const nlohmann::json& j, const std::string& path,
                                const char* key, bool required) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) err(path + "/" + key, "required field missing");
            return nullptr;
        }
        return &j.at(key);
    }

    bool number(const nlohmann::json& j, const std::string& path, double& out) {
        if (!j.is_number()) {
            err(path, "must be a number");
            return false;
        }
        out = j.get<double>();
        return true;
    }

    bool positive(const nlohmann::json& j, const std::string& path, double& out) {
        if (!number(j, path, out)) return false;
        if (!(out > 0.0)) {
            err(path, "must be positive");
            return false;
        }
        return true;
    }
};

const char* kScenarios[] = {"fig_rate_comparison", "fig_rate_vs_prob_low_v",
                            "fig_prob_single_vs_multi", "custom"};

void check_tier(Checker& c, const nlohmann::json& t, const std::string& path) {
    if (!t.is_object()) {
        c.err(path, "tier must be an object");
        return;
    }
    double x;
    if (const auto* d = c.field(t, path, "density", true)) c.positive(*d, path + "/density", x);
    if (const auto* p = c.field(t, path, "tx_power", false)) c.positive(*p, path + "/tx_power", x);
    if (const auto* b = c.field(t, path, "bias", false)) {
        if (c.number(*b, path + "/bias", x) && !(x >= 0.0)) c.err(path + "/bias", "must be >= 0");
    }
    if (const auto* a = c.field(t, path, "pathloss_exponent", false)) {
        if (c.number(*a, path + "/pathloss_exponent", x) && !(x > 2.0))
            c.err(path + "/pathloss_exponent", "must exceed 2 (interference integrability)");
    }
}

void check_deployment(Checker& c, const nlohmann::json& e, const std::string& path) {
    if (!e.is_object()) {
        c.err(path, "deployment entry must be an object");
        return;
    }
    if (const auto* pol = c.field(e, path, "policy", false)) {
        const std::string s = pol->is_string() ? pol->get<std::string>() : "";
        if (s != "nearest_bs" && s != "max_biased_power")
            c.err(path + "/policy", "must be nearest_bs or max_biased_power");
    }
    const auto* layout = c.field(e, path, "layout", true);
    bool lattice = false;
    if (layout) {
        const auto* kind = c.field(*layout, path + "/layout", "kind", true);
        std::string ks = kind && kind->is_string() ? kind->get<std::string>() : "";
        if (kind && ks != "ppp" && ks != "square_lattice" && ks != "hex_lattice")
            c.err(path + "/layout/kind", "must be ppp, square_lattice, or hex_lattice");
        lattice = ks == "square_lattice" || ks == "hex_lattice";
        double x;
        if (lattice) {
            const bool has_spacing = layout->contains("spacing");
            const bool has_density = layout->contains("density");
            if (!has_spacing && !has_density)
                c.err(path + "/layout", "lattice needs spacing or density");
            if (has_spacing) c.positive(layout->at("spacing"), path + "/layout/spacing", x);
            if (has_density) c.positive(layout->at("density"), path + "/layout/density", x);
        }
    }
    if (const auto* tiers = c.field(e, path, "tiers", !lattice)) {
        if (!tiers->is_array() || tiers->empty()) {
            c.err(path + "/tiers", "must be a nonempty array");
        } else {
            if (lattice && tiers->size() > 1)
                c.err(path + "/tiers", "lattice layouts have exactly one tier");
            for (std::size_t i = 0; i < tiers->size(); ++i)
                check_tier(c, (*tiers)[i], path + "/tiers/" + std::to_string(i));
        }
    }
}

}  // namespace

std::vector<Diagnostic> validate_config_json(const nlohmann::json& j) {
    Checker c;
    if (!j.is_object()) {
        c.err("/", "config must be a JSON object");
        return c.diags;
    }

    std::string scenario;
    if (const auto* s = c.field(j, "", "scenario", true)) {
        if (!s->is_string() ||
            std::find(std::begin(kScenarios), std::end(kScenarios), s->get<std::string>()) ==
                std::end(kScenarios))
            c.err("/scenario", "must be one of fig_rate_comparison, fig_rate_vs_prob_low_v, "
                               "fig_prob_single_vs_multi, custom");
        else
            scenario = s->get<std::string>();
    }

    if (const auto* sweep = c.field(j, "", "sweep", true)) {
        if (const auto* grid = c.field(*sweep, "/sweep", "grid", true)) {
            if (!grid->is_array() || grid->empty()) {
                c.err("/sweep/grid", "must be a nonempty array");
            } else {
                double prev = -1.0;
                for (std::size_t i = 0; i < grid->size(); ++i) {
                    double x;
                    const std::string p = "/sweep/grid/" + std::to_string(i);
                    if (!c.number((*grid)[i], p, x)) continue;
                    if (!(x >= 0.0)) c.err(p, "must be >= 0");
                    if (i > 0 && !(x > prev)) c.err(p, "grid must be strictly increasing");
                    prev = x;
                }
            }
        }
    }

    if (const auto* plan = c.field(j, "", "plan", false)) {
        if (const auto* n = c.field(*plan, "/plan", "n_replications", false)) {
            if (!n->is_number_integer() || n->get<std::int64_t>() < 1)
                c.err("/plan/n_replications", "must be an integer >= 1");
        }
        if (const auto* w = c.field(*plan, "/plan", "parallel_width", false)) {
            if (!w->is_number_integer() || w->get<std::int64_t>() < 0)
                c.err("/plan/parallel_width", "must be an integer >= 0");
        }
    }

    if (const auto* quad = c.field(j, "", "quad", false)) {
        double x;
        for (const char* key : {"abs_tol", "rel_tol"}) {
            if (const auto* t = c.field(*quad, "/quad", key, false)) {
                if (c.number(*t, std::string("/quad/") + key, x) && !(x > 0.0 && x <= 1e-2))
                    c.err(std::string("/quad/") + key, "must lie in (0, 1e-2]");
            }
        }
        if (const auto* r = c.field(*quad, "/quad", "r_max_factor", false)) {
            if (c.number(*r, "/quad/r_max_factor", x) && !(x >= 6.0))
                c.err("/quad/r_max_factor", "must be >= 6");
        }
    }

    if (const auto* t = c.field(j, "", "assert_threshold", false)) {
        double x;
        if (c.number(*t, "/assert_threshold", x) && !(x > 0.0))
            c.err("/assert_threshold", "must be positive");
    }

    std::size_t n_dep = 0;
    bool has_single_ppp = false, has_multi = false;
    if (const auto* deps = c.field(j, "", "deployments", true)) {
        if (!deps->is_array() || deps->empty()) {
            c.err("/deployments", "must be a nonempty array");
        } else {
            n_dep = deps->size();
            for (std::size_t i = 0; i < deps->size(); ++i) {
                const std::string p = "/deployments/" + std::to_string(i);
                check_deployment(c, (*deps)[i], p);
                const auto& e = (*deps)[i];
                if (e.is_object() && e.contains("tiers") && e.at("tiers").is_array()) {
                    const std::size_t nt = e.at("tiers").size();
                    const bool ppp = e.contains("layout") && e.at("layout").is_object() &&
                                     e.at("layout").value("kind", "") == "ppp";
                    if (ppp && nt == 1) has_single_ppp = true;
                    if (nt > 1) has_multi = true;
                }
            }
        }
    }

    bool mobility_ok = false;
    if (j.contains("mobility")) {
        try {
            ModelConfig m = j.at("mobility").get<ModelConfig>();
            (void)m;
            mobility_ok = true;
        } catch (const std::exception& ex) {
            c.err("/mobility", ex.what());
        }
    }

    if (scenario == "fig_rate_comparison" && !j.contains("mobility"))
        c.err("/mobility", "rate scenarios require a mobility model");
    if (scenario == "fig_rate_vs_prob_low_v" && n_dep > 0 && !has_single_ppp)
        c.err("/deployments", "scenario needs a single-tier ppp deployment");
    if (scenario == "fig_prob_single_vs_multi" && n_dep > 0 && !(has_single_ppp && has_multi))
        c.err("/deployments", "scenario needs one single-tier and one multi-tier ppp deployment");
    if (scenario == "custom") {
        const auto* m = c.field(j, "", "metric", true);
        const std::string metric = m && m->is_string() ? m->get<std::string>() : "";
        if (m && metric != "handoff_rate" && metric != "handoff_prob" && metric != "sojourn")
            c.err("/metric", "must be handoff_rate, handoff_prob, or sojourn");
        if (metric == "handoff_rate" && !mobility_ok && !j.contains("mobility"))
            c.err("/mobility", "handoff_rate metric requires a mobility model");
    }
    return c.diags;
}

std::vector<Diagnostic> validate_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // byte offset -> line reference
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        return {{"line " + std::to_string(line), e.what()}};
    }
    return validate_config_json(j);
}

// ---- parsing -------------------------------------------------------------------

namespace {

DeploymentEntry parse_deployment_entry(const nlohmann::json& e, std::size_t index) {
    DeploymentEntry out;
    out.name = e.value("name", "deployment" + std::to_string(index));
    const std::string pol = e.value("policy", "nearest_bs");
    out.policy = pol == "max_biased_power" ? AssociationPolicy::biased_power()
                                           : AssociationPolicy::nearest();
    const nlohmann::json& layout = e.at("layout");
    const std::string kind = layout.at("kind").get<std::string>();
    out.spec.layout.kind = layout_from_name(kind);

    std::vector<Tier> tiers;
    if (e.contains("tiers")) tiers = e.at("tiers").get<std::vector<Tier>>();

    if (out.spec.layout.kind == LayoutKind::Ppp) {
        out.spec.tiers = tiers;
    } else {
        double d = layout.value("spacing", 0.0);
        if (d <= 0.0) {
            const double density = layout.at("density").get<double>();
            d = out.spec.layout.kind == LayoutKind::SquareLattice
                    ? 1.0 / std::sqrt(density)
                    : hex_side_for_density(density);
        }
        out.spec.layout.spacing = d;
        Tier proto = tiers.empty() ? Tier{1.0, 1.0, 1.0, 4.0} : tiers[0];
        proto.density = out.spec.layout.kind == LayoutKind::SquareLattice
                            ? square_lattice_density(d)
                            : hex_lattice_density(d);
        out.spec.tiers = {proto};
    }
    out.spec.validate();
    return out;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    auto diags = validate_config_json(j);
    if (!diags.empty()) throw ConfigError(std::move(diags));

    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.scenario = j.at("scenario").get<std::string>();
    cfg.metric = j.value("metric", "");
    const nlohmann::json& sweep = j.at("sweep");
    cfg.sweep.variable = sweep.value("variable", "velocity");
    cfg.sweep.grid = sweep.at("grid").get<std::vector<double>>();
    if (j.contains("plan")) {
        const nlohmann::json& p = j.at("plan");
        cfg.plan.n_replications = p.value("n_replications", cfg.plan.n_replications);
        cfg.plan.base_seed = p.value("base_seed", cfg.plan.base_seed);
        cfg.plan.parallel_width = p.value("parallel_width", cfg.plan.parallel_width);
    }
    if (j.contains("quad")) {
        const nlohmann::json& q = j.at("quad");
        cfg.quad.abs_tol = q.value("abs_tol", cfg.quad.abs_tol);
        cfg.quad.rel_tol = q.value("rel_tol", cfg.quad.rel_tol);
        cfg.quad.r_max_factor = q.value("r_max_factor", cfg.quad.r_max_factor);
        cfg.quad.max_subdivisions = q.value("max_subdivisions", cfg.quad.max_subdivisions);
    }
    cfg.assert_threshold = j.value("assert_threshold", cfg.assert_threshold);
    cfg.output_dir = j.value("output", cfg.output_dir);
    cfg.rate_seconds_per_point = j.value("rate_seconds_per_point", cfg.rate_seconds_per_point);
    cfg.rate_replications = j.value("rate_replications", cfg.rate_replications);
    cfg.sojourn_T = j.value("sojourn_T", cfg.sojourn_T);
    if (j.contains("mobility")) cfg.mobility = j.at("mobility").get<ModelConfig>();
    const nlohmann::json& deps = j.at("deployments");
    for (std::size_t i = 0; i < deps.size(); ++i)
        cfg.deployments.push_back(parse_deployment_entry(deps[i], i));
    return cfg;
}

// ---- scenario execution ---------------------------------------------------------

namespace {

ModelConfig with_velocity(const ModelConfig& model, double v) {
    ModelConfig m = model;
    if (auto* mrd = std::get_if<MrdConfig>(&m)) {
        mrd->velocity = VelocitySpec::constant(v);
        return m;
    }
    if (auto* drone = std::get_if<Drone3dConfig>(&m)) {
        drone->mean_speed = v;
        return m;
    }
    throw ConfigError({Diagnostic{"/sweep", "velocity sweep supports modified_random_direction and "
                                  "drone3d mobility models"}});
}

// Analytical boundary length intensity; multi-tier weighted cells fall back
// to the Delta-d Monte Carlo estimate, which feeds the rate formula.
double analytic_mu1(const DeploymentEntry& dep, std::uint64_t seed, const QuadratureSpec&) {
    const DeploymentSpec& spec = dep.spec;
    if (spec.layout.kind == LayoutKind::SquareLattice) return 2.0 / spec.layout.spacing;
    if (spec.layout.kind == LayoutKind::HexLattice)
        return 2.0 / (std::sqrt(3.0) * spec.layout.spacing);
    if (spec.tiers.size() == 1) return 2.0 * std::sqrt(spec.tiers[0].density);

    double lambda_sum = 0.0, lambda_min = spec.tiers[0].density;
    for (const Tier& t : spec.tiers) {
        lambda_sum += t.density;
        lambda_min = std::min(lambda_min, t.density);
    }
    const Region frame = Region::square(40.0 / std::sqrt(lambda_min));
    const double delta = 0.01 / std::sqrt(lambda_sum);
    double sum = 0.0;
    const int realizations = 2;
    for (int r = 0; r < realizations; ++r) {
        const Deployment d =
            build_ppp_deployment(spec.tiers, frame, mix64(seed) ^ mix64(777 + r));
        const auto est = estimate_length_intensity(d, dep.policy, delta, 100000,
                                                   mix64(seed) ^ mix64(991 + r));
        sum += est.mu1_hat;
    }
    return sum / realizations;
}

double quad_prob(const DeploymentEntry& dep, double v, const QuadratureSpec& quad) {
    if (dep.spec.tiers.size() == 1)
        return handoff_prob(v, dep.spec.tiers[0].density, quad).value;
    return multi_tier_handoff_prob(v, dep.spec.tiers, quad).total;
}

std::uint64_t point_seed(std::uint64_t base, std::size_t dep_index, std::size_t v_index) {
    return mix64(base ^ mix64(1000003ULL * (dep_index + 1) + v_index));
}

double rel_gap(double reference, double value) {
    return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

void csv_row(std::string& csv, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const std::string& c : cells) {
        if (!first) csv += ',';
        csv += c;
        first = false;
    }
    csv += '\n';
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult out;
    double max_gap = 0.0;
    nlohmann::json records = nlohmann::json::array();

    auto note_gap = [&](double g) {
        max_gap = std::max(max_gap, g);
        if (g > cfg.assert_threshold) out.gap_exceeded = true;
    };

    if (cfg.scenario == "fig_rate_comparison" ||
        (cfg.scenario == "custom" && cfg.metric == "handoff_rate")) {
        if (!cfg.mobility) throw ConfigError({Diagnostic{"/mobility", "mobility model required"}});
        csv_row(out.csv, {"deployment", "velocity", "analytic_rate", "sim_rate", "sim_se",
                          "ci_low", "ci_high", "rel_gap"});
        for (std::size_t di = 0; di < cfg.deployments.size(); ++di) {
            const DeploymentEntry& dep = cfg.deployments[di];
            const double mu1 = analytic_mu1(dep, cfg.plan.base_seed, cfg.quad);
            for (std::size_t vi = 0; vi < cfg.sweep.grid.size(); ++vi) {
                const double v = cfg.sweep.grid[vi];
                const ModelConfig model = with_velocity(*cfg.mobility, v);
                const MobilityMoments moments = mobility_moments(model);
                const double ana = std::holds_alternative<Drone3dConfig>(model) &&
                                           dep.spec.tiers.size() == 1
                                       ? drone_handoff_rate(v, dep.spec.tiers[0].density)
                                       : handoff_rate(mu1, moments);
                ReplicationPlan plan = cfg.plan;
                plan.n_replications = cfg.rate_replications;
                plan.base_seed = point_seed(cfg.plan.base_seed, di, vi);
                const double per_rep =
                    cfg.rate_seconds_per_point / static_cast<double>(cfg.rate_replications);
                const Estimate sim =
                    estimate_handoff_rate(model, dep.spec, dep.policy, plan, per_rep);
                ResultRow row;
                row.label = dep.name;
                row.sweep_value = v;
                row.analytic = ana;
                row.simulated = sim;
                row.rel_gap = rel_gap(ana, sim.mean);
                note_gap(*row.rel_gap);
                out.rows.push_back(row);
                csv_row(out.csv, {dep.name, fmt(v), fmt(ana), fmt(sim.mean), fmt(sim.std_error),
                                  fmt(sim.ci95_low), fmt(sim.ci95_high), fmt(*row.rel_gap)});
                records.push_back(analysis_record({{"deployment", dep.name}, {"velocity", v}},
                                                  ana, 0.0, "closed_form_rate"));
            }
        }
    } else if (cfg.scenario == "fig_rate_vs_prob_low_v") {
        csv_row(out.csv, {"velocity", "rate_analytic", "prob_quadrature", "prob_sim",
                          "prob_sim_se", "ci_low", "ci_high", "gap_rate_vs_prob",
                          "gap_quad_vs_sim"});
        const DeploymentEntry& dep = cfg.deployments.front();
        const double lambda = dep.spec.tiers[0].density;
        for (std::size_t vi = 0; vi < cfg.sweep.grid.size(); ++vi) {
            const double v = cfg.sweep.grid[vi];
            const double rate = 4.0 / kPi * v * std::sqrt(lambda);  // unit movement period
            const QuadOutcome quad = handoff_prob(v, lambda, cfg.quad);
            ReplicationPlan plan = cfg.plan;
            plan.base_seed = point_seed(cfg.plan.base_seed, 0, vi);
            const Estimate sim = estimate_handoff_prob(v, dep.spec, dep.policy, plan);
            const double gap_rp = rel_gap(rate, quad.value);
            const double gap_qs = rel_gap(quad.value, sim.mean);
            note_gap(gap_rp);
            note_gap(gap_qs);
            ResultRow row;
            row.label = dep.name;
            row.sweep_value = v;
            row.analytic = quad.value;
            row.simulated = sim;
            row.rel_gap = gap_qs;
            row.extras = {{"rate_analytic", rate}, {"gap_rate_vs_prob", gap_rp}};
            out.rows.push_back(row);
            csv_row(out.csv, {fmt(v), fmt(rate), fmt(quad.value), fmt(sim.mean),
                              fmt(sim.std_error), fmt(sim.ci95_low), fmt(sim.ci95_high),
                              fmt(gap_rp), fmt(gap_qs)});
            records.push_back(analysis_record({{"velocity", v}, {"lambda", lambda}}, quad.value,
                                              quad.error, "adaptive_gk_quadrature"));
        }
    } else if (cfg.scenario == "fig_prob_single_vs_multi" ||
               (cfg.scenario == "custom" && cfg.metric == "handoff_prob")) {
        csv_row(out.csv, {"deployment", "velocity", "prob_quadrature", "prob_sim", "prob_sim_se",
                          "ci_low", "ci_high", "rel_gap"});
        std::vector<std::vector<double>> quad_by_dep(cfg.deployments.size());
        std::vector<std::vector<Estimate>> sim_by_dep(cfg.deployments.size());
        for (std::size_t di = 0; di < cfg.deployments.size(); ++di) {
            const DeploymentEntry& dep = cfg.deployments[di];
            for (std::size_t vi = 0; vi < cfg.sweep.grid.size(); ++vi) {
                const double v = cfg.sweep.grid[vi];
                const double quad = quad_prob(dep, v, cfg.quad);
                ReplicationPlan plan = cfg.plan;
                plan.base_seed = point_seed(cfg.plan.base_seed, di, vi);
                const Estimate sim = estimate_handoff_prob(v, dep.spec, dep.policy, plan);
                quad_by_dep[di].push_back(quad);
                sim_by_dep[di].push_back(sim);
                ResultRow row;
                row.label = dep.name;
                row.sweep_value = v;
                row.analytic = quad;
                row.simulated = sim;
                row.rel_gap = rel_gap(quad, sim.mean);
                note_gap(*row.rel_gap);
                out.rows.push_back(row);
                csv_row(out.csv, {dep.name, fmt(v), fmt(quad), fmt(sim.mean),
                                  fmt(sim.std_error), fmt(sim.ci95_low), fmt(sim.ci95_high),
                                  fmt(*row.rel_gap)});
                records.push_back(analysis_record({{"deployment", dep.name}, {"velocity", v}},
                                                  quad, 0.0, "adaptive_gk_quadrature"));
            }
        }
        // a denser combined network hands off at least as often
        if (cfg.scenario == "fig_prob_single_vs_multi") {
            std::size_t single = 0, multi = 0;
            for (std::size_t di = 0; di < cfg.deployments.size(); ++di)
                (cfg.deployments[di].spec.tiers.size() == 1 ? single : multi) = di;
            for (std::size_t vi = 0; vi < cfg.sweep.grid.size(); ++vi) {
                const bool quad_ok = quad_by_dep[multi][vi] >= quad_by_dep[single][vi] - 1e-9;
                const Estimate &es = sim_by_dep[single][vi], &em = sim_by_dep[multi][vi];
                const bool sim_ok =
                    em.mean >= es.mean - 3.0 * (es.std_error + em.std_error);
                if (!quad_ok || !sim_ok) out.gap_exceeded = true;
            }
        }
    } else if (cfg.scenario == "custom" && cfg.metric == "sojourn") {
        csv_row(out.csv, {"deployment", "velocity", "sojourn_analytic", "sojourn_sim",
                          "sojourn_se", "ci_low", "ci_high", "rel_gap"});
        for (std::size_t di = 0; di < cfg.deployments.size(); ++di) {
            const DeploymentEntry& dep = cfg.deployments[di];
            if (dep.spec.tiers.size() != 1 ||
                dep.policy.kind != AssociationPolicy::Kind::NearestBs)
                throw ConfigError({Diagnostic{"/deployments/" + std::to_string(di),
                                    "analytical sojourn time is unavailable for multi-tier or "
                                    "biased association (non-convex cells)"}});
            for (std::size_t vi = 0; vi < cfg.sweep.grid.size(); ++vi) {
                const double v = cfg.sweep.grid[vi];
                const QuadOutcome ana =
                    sojourn_time(v, cfg.sojourn_T, dep.spec.tiers[0].density, cfg.quad);
                ReplicationPlan plan = cfg.plan;
                plan.base_seed = point_seed(cfg.plan.base_seed, di, vi);
                const Estimate sim =
                    estimate_sojourn(v, cfg.sojourn_T, dep.spec, dep.policy, plan);
                ResultRow row;
                row.label = dep.name;
                row.sweep_value = v;
                row.analytic = ana.value;
                row.simulated = sim;
                row.rel_gap = rel_gap(ana.value, sim.mean);
                note_gap(*row.rel_gap);
                out.rows.push_back(row);
                csv_row(out.csv, {dep.name, fmt(v), fmt(ana.value), fmt(sim.mean),
                                  fmt(sim.std_error), fmt(sim.ci95_low), fmt(sim.ci95_high),
                                  fmt(*row.rel_gap)});
                records.push_back(analysis_record(
                    {{"deployment", dep.name}, {"velocity", v}, {"T", cfg.sojourn_T}},
                    ana.value, ana.error, "sojourn_quadrature"));
            }
        }
    } else {
        throw ConfigError({Diagnostic{"/scenario", "unsupported scenario/metric combination"}});
    }

    const auto t1 = std::chrono::steady_clock::now();
    out.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();

    nlohmann::json rows_json = nlohmann::json::array();
    for (const ResultRow& r : out.rows) {
        nlohmann::json jr = {{"label", r.label}, {"sweep_value", r.sweep_value}};
        if (r.analytic) jr["analytic"] = *r.analytic;
        if (r.simulated)
            jr["simulated"] = estimate_to_json(*r.simulated, cfg.plan.base_seed,
                                               config_digest(cfg.raw));
        if (r.rel_gap) jr["rel_gap"] = *r.rel_gap;
        for (const auto& [k, val] : r.extras) jr[k] = val;
        rows_json.push_back(std::move(jr));
    }
    out.summary = {{"scenario", cfg.scenario},
                   {"config_digest", config_digest(cfg.raw)},
                   {"base_seed", cfg.plan.base_seed},
                   {"rows", std::move(rows_json)},
                   {"analysis_records", std::move(records)},
                   {"max_rel_gap", max_gap},
                   {"assert_threshold", cfg.assert_threshold},
                   {"gap_exceeded", out.gap_exceeded}};
    // runtime stays out of summary.json so reruns are bit-identical

    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream csv(std::filesystem::path(cfg.output_dir) / "table.csv");
        csv << out.csv;
        std::ofstream summary(std::filesystem::path(cfg.output_dir) / "summary.json");
        summary << out.summary.dump(2) << '\n';
    }
    return out;
}

// ---- bundled scenarios -----------------------------------------------------------

nlohmann::json builtin_figure_config(const std::string& name) {
    const nlohmann::json two_tier = {
        {"name", "two_tier_ppp"},
        {"policy", "max_biased_power"},
        {"layout", {{"kind", "ppp"}}},
        {"tiers",
         {{{"density", 0.0004}, {"tx_power", 1.0}, {"bias", 1.0}, {"pathloss_exponent", 4.0}},
          {{"density", 0.001}, {"tx_power", 0.2}, {"bias", 4.0}, {"pathloss_exponent", 4.0}}}}};
    const nlohmann::json single_ppp = {
        {"name", "single_tier_ppp"},
        {"policy", "nearest_bs"},
        {"layout", {{"kind", "ppp"}}},
        {"tiers",
         {{{"density", 0.0004}, {"tx_power", 1.0}, {"bias", 1.0}, {"pathloss_exponent", 4.0}}}}};
    const nlohmann::json mrd = {{"model", "modified_random_direction"},
                                {"waypoint_intensity", 0.0004},
                                {"velocity", {{"kind", "constant"}, {"value", 10.0}}},
                                {"pause", 0.0}};

    if (name == "fig_rate_comparison") {
        return {{"scenario", "fig_rate_comparison"},
                {"output", "out/fig_rate_comparison"},
                {"assert_threshold", 0.10},
                {"sweep", {{"variable", "velocity"},
                           {"grid", {2, 4, 6, 8, 10, 12, 14, 16, 18, 20}}}},
                {"plan", {{"n_replications", 100000}, {"base_seed", 20240601},
                          {"parallel_width", 0}}},
                {"rate_seconds_per_point", 10000.0},
                {"rate_replications", 40},
                {"mobility", mrd},
                {"deployments",
                 {{{"name", "square_lattice"},
                   {"policy", "nearest_bs"},
                   {"layout", {{"kind", "square_lattice"}, {"density", 0.0004}}}},
                  {{"name", "hex_lattice"},
                   {"policy", "nearest_bs"},
                   {"layout", {{"kind", "hex_lattice"}, {"density", 0.0004}}}},
                  single_ppp,
                  two_tier}}};
    }
    if (name == "fig_rate_vs_prob_low_v") {
        return {{"scenario", "fig_rate_vs_prob_low_v"},
                {"output", "out/fig_rate_vs_prob_low_v"},
                {"assert_threshold", 0.06},
                {"sweep", {{"variable", "velocity"}, {"grid", {0.5, 1.0, 2.0}}}},
                {"plan", {{"n_replications", 100000}, {"base_seed", 20240602},
                          {"parallel_width", 0}}},
                {"deployments", {single_ppp}}};
    }
    if (name == "fig_prob_single_vs_multi") {
        return {{"scenario", "fig_prob_single_vs_multi"},
                {"output", "out/fig_prob_single_vs_multi"},
                {"assert_threshold", 0.06},
                {"sweep", {{"variable", "velocity"}, {"grid", {2, 5, 10, 20, 35, 50}}}},
                {"plan", {{"n_replications", 100000}, {"base_seed", 20240603},
                          {"parallel_width", 0}}},
                {"deployments", {single_ppp, two_tier}}};
    }
    throw ConfigError({Diagnostic{"/figure", "unknown figure scenario: " + name}});
}

}  // namespace cellmob
