#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ccc/errors.hpp"
#include "ccc/factorization.hpp"
#include "ccc/gauge.hpp"
#include "ccc/scale.hpp"
#include "ccc/spaces.hpp"
#include "ccc/transport.hpp"

namespace {

using ccc::Json;

struct CommonOpts {
    std::string fn;
    int grid_points = 2048;
    double r_max = 10.0;
    double tol = 0.0;  // per-command default
    std::string out;
    std::string format = "json";
};

void validate_common(const CommonOpts& o, bool allow_csv) {
    if (o.grid_points < 64)
        throw ccc::ValidationError("config: grid_points must be at least 64");
    if (!(o.r_max > 0.0))
        throw ccc::ValidationError("config: r_max must be positive");
    if (o.format != "json" && o.format != "csv")
        throw ccc::ValidationError("config: format must be 'json' or 'csv'");
    if (o.format == "csv" && !allow_csv)
        throw ccc::ValidationError(
            "config: csv output is only available for factorize and "
            "wasserstein");
}

void validate_tol(double tol) {
    if (!(tol > 0.0 && tol < 1.0))
        throw ccc::ValidationError("config: tol must lie in (0, 1)");
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f)
        throw ccc::ValidationError("cannot open output file '" + o.out + "'");
    f << text;
}

Json load_file(const std::string& path) { return ccc::parse_json_file(path); }

ccc::FiniteMetricSpace load_metric(const std::string& path,
                                   bool check_triangle) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        std::ifstream in(path);
        if (!in)
            throw ccc::ValidationError("cannot open file '" + path + "'");
        return ccc::load_metric_csv(in, path, check_triangle);
    }
    return ccc::load_metric_space(load_file(path), check_triangle);
}

Json invariants_json(const ccc::FactorizationCheck& c) {
    return Json{{"max_concavity_violation", c.max_concavity_violation},
                {"max_convexity_violation", c.max_convexity_violation},
                {"max_composition_rel_error", c.max_composition_rel_error},
                {"ok", c.ok}};
}

Json table_json(const ccc::TabulatedMonotone& t) {
    return Json{{"grid", t.grid()}, {"values", t.values()}};
}

// ---- factorize ----

struct FactorizeOpts {
    CommonOpts common;
};

void run_factorize(const FactorizeOpts& o) {
    validate_common(o.common, /*allow_csv=*/true);
    const ccc::ScaleSpec spec = ccc::ScaleSpec::parse(o.common.fn);
    const ccc::Factorization fact = ccc::minimal_factorization(
        spec, o.common.grid_points, o.common.r_max);

    if (o.common.format == "csv") {
        std::string out = "r,psi_hat,s,phi_check\n";
        const auto& r = fact.psi_hat.grid();
        const auto& p = fact.psi_hat.values();
        const auto& s = fact.phi_check.grid();
        const auto& f = fact.phi_check.values();
        for (std::size_t k = 0; k < r.size(); ++k) {
            out += Json(r[k]).dump() + ',' + Json(p[k]).dump() + ',' +
                   Json(s[k]).dump() + ',' + Json(f[k]).dump() + '\n';
        }
        emit(o.common, out);
        return;
    }

    Json doc{{"command", "factorize"},
             {"config",
              Json{{"fn", spec.label()},
                   {"grid_points", o.common.grid_points},
                   {"r_max", o.common.r_max},
                   {"format", o.common.format}}},
             {"psi_hat", table_json(fact.psi_hat)},
             {"phi_check", table_json(fact.phi_check)},
             {"phi_check_inv_at_1", std::isnan(fact.phi_check_inv_at_1)
                                        ? Json(nullptr)
                                        : Json(fact.phi_check_inv_at_1)},
             {"invariants", invariants_json(fact.check)}};
    emit(o.common, doc.dump(2) + "\n");
}

// ---- orlicz ----

struct OrliczOpts {
    CommonOpts common;
    std::string f_path, g_path, space_path;
};

void run_orlicz(const OrliczOpts& o) {
    validate_common(o.common, /*allow_csv=*/false);
    validate_tol(o.common.tol);
    const ccc::ScaleSpec spec = ccc::ScaleSpec::parse(o.common.fn);
    const ccc::SampleFunction f =
        ccc::load_sample_function(load_file(o.f_path));
    const ccc::SampleFunction g =
        ccc::load_sample_function(load_file(o.g_path));
    const ccc::WeightedSpace space =
        ccc::load_weighted_space(load_file(o.space_path));
    const ccc::Factorization fact = ccc::minimal_factorization(
        spec, o.common.grid_points, o.common.r_max);
    const ccc::GaugeResult res =
        ccc::orlicz_distance(f, g, fact, space, o.common.tol);

    Json doc{{"command", "orlicz"},
             {"config",
              Json{{"fn", spec.label()},
                   {"f", o.f_path},
                   {"g", o.g_path},
                   {"space", o.space_path},
                   {"tol", o.common.tol},
                   {"grid_points", o.common.grid_points},
                   {"r_max", o.common.r_max},
                   {"format", o.common.format}}},
             {"result",
              Json{{"distance", res.distance},
                   {"modular_at_t", res.modular_at_t},
                   {"bisection_iterations", res.bisection_iterations},
                   {"bracket", Json::array({res.bracket_lo, res.bracket_hi})}}},
             {"invariants", invariants_json(fact.check)}};
    emit(o.common, doc.dump(2) + "\n");
}

// ---- wasserstein ----

struct WassersteinOpts {
    CommonOpts common;
    std::string mu_path, nu_path, metric_path, pairs_path;
    bool skip_metric_check = false;
};

Json wasserstein_result_json(const ccc::WassersteinResult& res,
                             bool with_plan) {
    Json r{{"distance", res.distance},
           {"transport_modular_at_w", res.transport_modular_at_w},
           {"lp_solves", res.lp_solves},
           {"bracket", Json::array({res.bracket_lo, res.bracket_hi})}};
    if (with_plan) r["plan"] = ccc::to_json(res.optimal_plan);
    return r;
}

void run_wasserstein(const WassersteinOpts& o) {
    validate_common(o.common, /*allow_csv=*/true);
    validate_tol(o.common.tol);
    const bool batch = !o.pairs_path.empty();
    if (batch && (!o.mu_path.empty() || !o.nu_path.empty()))
        throw ccc::ValidationError(
            "config: --pairs excludes --mu/--nu");
    if (!batch && (o.mu_path.empty() || o.nu_path.empty()))
        throw ccc::ValidationError(
            "config: wasserstein needs --mu and --nu, or --pairs");
    if (batch && o.common.format == "csv")
        throw ccc::ValidationError("config: csv output is not available in "
                                   "batch mode");
    if (o.metric_path.empty())
        throw ccc::ValidationError("config: wasserstein needs --metric");

    const ccc::ScaleSpec spec = ccc::ScaleSpec::parse(o.common.fn);
    const ccc::FiniteMetricSpace space =
        load_metric(o.metric_path, !o.skip_metric_check);
    const ccc::Factorization fact = ccc::minimal_factorization(
        spec, o.common.grid_points, o.common.r_max);

    Json config{{"fn", spec.label()},
                {"metric", o.metric_path},
                {"tol", o.common.tol},
                {"grid_points", o.common.grid_points},
                {"r_max", o.common.r_max},
                {"skip_metric_check", o.skip_metric_check},
                {"format", o.common.format}};

    if (!batch) {
        const ccc::DiscreteMeasure mu =
            ccc::load_measure(load_file(o.mu_path));
        const ccc::DiscreteMeasure nu =
            ccc::load_measure(load_file(o.nu_path));
        const ccc::WassersteinResult res =
            ccc::wasserstein_distance(mu, nu, space, fact, o.common.tol);
        if (o.common.format == "csv") {
            std::string out;
            for (std::size_t i = 0; i < res.optimal_plan.rows(); ++i) {
                for (std::size_t j = 0; j < res.optimal_plan.cols(); ++j) {
                    out += Json(res.optimal_plan(i, j)).dump();
                    out += (j + 1 < res.optimal_plan.cols()) ? ',' : '\n';
                }
            }
            emit(o.common, out);
            return;
        }
        config["mu"] = o.mu_path;
        config["nu"] = o.nu_path;
        Json doc{{"command", "wasserstein"},
                 {"config", std::move(config)},
                 {"result", wasserstein_result_json(res, /*with_plan=*/true)}};
        emit(o.common, doc.dump(2) + "\n");
        return;
    }

    const Json manifest = load_file(o.pairs_path);
    if (!manifest.is_object() || !manifest.contains("pairs") ||
        !manifest.at("pairs").is_array())
        throw ccc::ValidationError(
            "bad schema: pairs manifest needs an array under 'pairs'");
    config["pairs"] = o.pairs_path;
    Json results = Json::array();
    for (const auto& entry : manifest.at("pairs")) {
        if (!entry.is_object() || !entry.contains("mu") ||
            !entry.contains("nu") || !entry.at("mu").is_string() ||
            !entry.at("nu").is_string())
            throw ccc::ValidationError(
                "bad schema: each pair needs string keys 'mu' and 'nu'");
        const std::string mu_path = entry.at("mu").get<std::string>();
        const std::string nu_path = entry.at("nu").get<std::string>();
        const ccc::DiscreteMeasure mu = ccc::load_measure(load_file(mu_path));
        const ccc::DiscreteMeasure nu = ccc::load_measure(load_file(nu_path));
        const ccc::WassersteinResult res =
            ccc::wasserstein_distance(mu, nu, space, fact, o.common.tol);
        Json one = wasserstein_result_json(res, /*with_plan=*/false);
        one["mu"] = mu_path;
        one["nu"] = nu_path;
        results.push_back(std::move(one));
    }
    Json doc{{"command", "wasserstein"},
             {"config", std::move(config)},
             {"results", std::move(results)}};
    emit(o.common, doc.dump(2) + "\n");
}

// ---- verify ----

struct VerifyOpts {
    CommonOpts common;
    std::string phi, psi, candidate;
    double grid_from = 0.05;
    double grid_to = 0.0;  // defaults to r_max
    int grid_n = 128;
};

void run_verify(const VerifyOpts& o) {
    validate_common(o.common, /*allow_csv=*/false);
    const bool residual_mode = !o.phi.empty() || !o.psi.empty();
    const bool minimality_mode = !o.candidate.empty();
    if (residual_mode && (o.phi.empty() || o.psi.empty()))
        throw ccc::ValidationError(
            "config: residual verification needs both --phi and --psi");
    if (residual_mode == minimality_mode)
        throw ccc::ValidationError(
            "config: verify needs either --phi/--psi or --candidate-psi");
    if (o.grid_n < 2)
        throw ccc::ValidationError("config: grid-n must be at least 2");

    const double to = o.grid_to > 0.0 ? o.grid_to : o.common.r_max;
    const std::vector<double> grid =
        ccc::geometric_grid(o.grid_from, to, o.grid_n);
    const ccc::ScaleSpec theta = ccc::ScaleSpec::parse(o.common.fn);

    Json config{{"fn", theta.label()},
                {"grid_from", o.grid_from},
                {"grid_to", to},
                {"grid_n", o.grid_n},
                {"grid_points", o.common.grid_points},
                {"r_max", o.common.r_max},
                {"format", o.common.format}};

    if (residual_mode) {
        const ccc::ScaleSpec phi = ccc::ScaleSpec::parse(o.phi);
        const ccc::ScaleSpec psi = ccc::ScaleSpec::parse(o.psi);
        const ccc::ResidualReport rep =
            ccc::verify_factorization(theta, phi, psi, grid);
        config["phi"] = phi.label();
        config["psi"] = psi.label();
        Json doc{{"command", "verify"},
                 {"mode", "residual"},
                 {"config", std::move(config)},
                 {"result",
                  Json{{"sup", rep.sup},
                       {"at_t", rep.at_t},
                       {"grid", rep.grid},
                       {"residuals", rep.residuals}}}};
        emit(o.common, doc.dump(2) + "\n");
        return;
    }

    const ccc::ScaleSpec candidate = ccc::ScaleSpec::parse(o.candidate);
    const ccc::Factorization fact = ccc::minimal_factorization(
        theta, o.common.grid_points, o.common.r_max);
    const ccc::MinimalityReport rep =
        ccc::minimality_gap(candidate, fact, grid);
    config["candidate_psi"] = candidate.label();
    Json doc{{"command", "verify"},
             {"mode", "minimality"},
             {"config", std::move(config)},
             {"result",
              Json{{"max_gap", rep.max_gap},
                   {"grid", rep.grid},
                   {"gap", rep.gap}}},
             {"invariants", invariants_json(fact.check)}};
    emit(o.common, doc.dump(2) + "\n");
}

std::string error_json(const char* type, const std::string& message) {
    return Json{{"error", Json{{"type", type}, {"message", message}}}}.dump() +
           "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "ccct: minimal convex-concave factorizations, Orlicz gauge "
        "distances and Wasserstein distances on finite spaces"};
    app.require_subcommand(1);

    FactorizeOpts fo;
    OrliczOpts oo;
    WassersteinOpts wo;
    VerifyOpts vo;

    const auto add_common = [](CLI::App* cmd, CommonOpts& c, double tol_def) {
        cmd->add_option("--fn", c.fn, "scale function spec")->required();
        cmd->add_option("--grid-points", c.grid_points,
                        "factorization grid size (>= 64)");
        cmd->add_option("--r-max", c.r_max, "factorization range");
        c.tol = tol_def;
        if (tol_def > 0.0)
            cmd->add_option("--tol", c.tol, "bisection tolerance");
        cmd->add_option("--out", c.out, "write output to file");
        cmd->add_option("--format", c.format, "json or csv");
    };

    auto* cf = app.add_subcommand("factorize",
                                  "compute the minimal factorization");
    add_common(cf, fo.common, 0.0);

    auto* co = app.add_subcommand("orlicz", "gauge distance between samples");
    add_common(co, oo.common, 1e-9);
    co->add_option("--f", oo.f_path, "sample function JSON")->required();
    co->add_option("--g", oo.g_path, "sample function JSON")->required();
    co->add_option("--space", oo.space_path, "weighted space JSON")->required();

    auto* cw = app.add_subcommand("wasserstein",
                                  "transport distance between measures");
    add_common(cw, wo.common, 1e-6);
    cw->add_option("--mu", wo.mu_path, "measure JSON");
    cw->add_option("--nu", wo.nu_path, "measure JSON");
    cw->add_option("--metric", wo.metric_path, "metric JSON or CSV");
    cw->add_option("--pairs", wo.pairs_path, "batch manifest JSON");
    cw->add_flag("--skip-metric-check", wo.skip_metric_check,
                 "skip the O(n^3) triangle inequality check");

    auto* cv = app.add_subcommand(
        "verify", "factorization residual or minimality certificate");
    add_common(cv, vo.common, 0.0);
    cv->add_option("--phi", vo.phi, "outer factor spec (residual mode)");
    cv->add_option("--psi", vo.psi, "inner factor spec (residual mode)");
    cv->add_option("--candidate-psi", vo.candidate,
                   "candidate inner factor (minimality mode)");
    cv->add_option("--grid-from", vo.grid_from, "first grid point");
    cv->add_option("--grid-to", vo.grid_to, "last grid point (default r_max)");
    cv->add_option("--grid-n", vo.grid_n, "grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << error_json("validation", e.what());
        return 2;
    }

    try {
        if (cf->parsed()) run_factorize(fo);
        if (co->parsed()) run_orlicz(oo);
        if (cw->parsed()) run_wasserstein(wo);
        if (cv->parsed()) run_verify(vo);
        return 0;
    } catch (const ccc::ValidationError& e) {
        std::cerr << error_json("validation", e.what());
        return 2;
    } catch (const ccc::NumericError& e) {
        std::cerr << error_json("numerical", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::cerr << error_json("internal", e.what());
        return 3;
    }
}
