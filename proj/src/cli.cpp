#include "frachs/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "frachs/error.hpp"
#include "frachs/groundstate.hpp"
#include "frachs/io.hpp"
#include "frachs/perturb.hpp"
#include "frachs/specfun.hpp"
#include "frachs/spectrum.hpp"

namespace frachs {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// NaN and infinities become null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json config_json(const RunConfig& c) {
    Json j;
    j["command"] = c.command;
    j["n"] = c.n;
    j["s"] = c.s;
    j["q"] = c.q;
    j["lambda"] = c.lambda;
    j["critical"] = c.critical;
    j["L"] = c.L ? Json(*c.L) : Json(nullptr);
    j["N"] = c.N;
    j["tol"] = c.tol;
    j["max-iter"] = c.max_iter;
    j["ell-max"] = c.ell_max;
    j["m"] = c.m;
    j["tau-max"] = c.tau_max;
    j["tau-step"] = c.tau_step;
    j["lambdas"] = c.lambdas;
    j["eps"] = c.eps;
    j["weight"] = c.weight;
    j["weight-center"] = c.weight_center;
    j["weight-width"] = c.weight_width;
    j["weight-height"] = c.weight_height;
    j["weight-base"] = c.weight_base;
    j["t-log-min"] = c.t_log_min;
    j["t-log-max"] = c.t_log_max;
    j["t-log-count"] = c.t_log_count;
    j["out-dir"] = c.out_dir;
    return j;
}

Json params_json(const ProblemParams& p) {
    return Json{{"n", p.n},
                {"s", p.s},
                {"q", p.q},
                {"b", p.b},
                {"lambda", p.lambda},
                {"sphere_measure", p.sphere_measure},
                {"hardy_constant", p.hardy},
                {"critical", p.critical}};
}

Json ground_json(const GroundState& g) {
    return Json{{"params", params_json(g.params)},
                {"grid", {{"L", g.grid.half_length()}, {"N", g.grid.size()}}},
                {"best_constant", number(g.best_constant)},
                {"residual", number(g.residual)},
                {"decay_rate", number(g.decay_rate)},
                {"iterations", g.iterations},
                {"converged", g.converged}};
}

void emit(const fs::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

struct Context {
    const RunConfig& config;
    std::ostream& out;
    ProblemParams params;
    EFGrid grid;
    fs::path dir;

    Json summary() const {
        Json j;
        j["command"] = config.command;
        j["config"] = config_json(config);
        return j;
    }
};

// Solves the ground state; an unconverged iterate is kept for partial output.
GroundState ground_of(const Context& ctx) {
    GroundOptions opt;
    opt.tol = ctx.config.tol;
    opt.max_iter = ctx.config.max_iter;
    opt.allow_unconverged = true;
    return solve_ground(ctx.params, ctx.grid, opt);
}

int write_ground(const Context& ctx, const GroundState& g, const std::string& stem) {
    write_file_atomic(ctx.dir / (stem + "_profile.csv"), profile_csv(g.v));
    Json j = ctx.summary();
    j.update(ground_json(g));
    emit(ctx.dir / (stem + ".json"), j);
    return g.converged ? kExitOk : kExitNotConverged;
}

int cmd_symbol(const Context& ctx) {
    const RunConfig& c = ctx.config;
    if (!(c.tau_step > 0.0) || !(c.tau_max >= 0.0) || c.ell_max < 0)
        throw std::invalid_argument("symbol table needs tau-step > 0, tau-max >= 0, ell-max >= 0");
    CsvWriter csv({"ell", "tau", "lambda"});
    const long steps = std::lround(std::floor(c.tau_max / c.tau_step + 1e-9));
    for (int ell = 0; ell <= c.ell_max; ++ell)
        for (long k = 0; k <= steps; ++k) {
            const double tau = static_cast<double>(k) * c.tau_step;
            csv.cell(ell).cell(tau).cell(sector_symbol({ell, tau, c.n, c.s}));
            csv.end_row();
        }
    write_file_atomic(ctx.dir / "symbol.csv", csv.str());
    Json j = ctx.summary();
    j["hardy_constant"] = hardy_constant(c.n, c.s);
    emit(ctx.dir / "symbol.json", j);
    ctx.out << "symbol: H_s = " << format_double(hardy_constant(c.n, c.s)) << ", "
            << (c.ell_max + 1) * (steps + 1) << " rows -> " << (ctx.dir / "symbol.csv").string()
            << "\n";
    return kExitOk;
}

int cmd_ground(const Context& ctx) {
    const GroundState g = ground_of(ctx);
    const int code = write_ground(ctx, g, "ground");
    ctx.out << "ground: S = " << format_double(g.best_constant) << ", residual "
            << format_double(g.residual) << ", " << g.iterations << " iterations"
            << (g.converged ? "" : " (not converged)") << " -> " << ctx.dir.string() << "\n";
    return code;
}

int cmd_spectrum(const Context& ctx) {
    const RunConfig& c = ctx.config;
    if (c.ell_max < 0 || c.m < 1) throw std::invalid_argument("spectrum needs ell-max >= 0 and m >= 1");
    const GroundState g = ground_of(ctx);
    if (!g.converged) {
        write_ground(ctx, g, "ground");
        ctx.out << "spectrum: ground state did not converge (residual "
                << format_double(g.residual) << ")\n";
        return kExitNotConverged;
    }
    const double q = ctx.params.q;
    CsvWriter csv({"ell", "index", "mu", "gap_to_qminus1"});
    Json sectors = Json::array();
    for (int ell = 0; ell <= c.ell_max; ++ell) {
        const SectorSpectrum sp = sector_spectrum(g, ell, c.m);
        for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) {
            csv.cell(ell).cell(static_cast<int>(i + 1)).cell(sp.eigenvalues[i]).cell(sp.eigenvalues[i] - (q - 1.0));
            csv.end_row();
        }
        sectors.push_back({{"ell", ell},
                           {"multiplicity", sp.multiplicity},
                           {"eigenvalues", sp.eigenvalues},
                           {"gap_to_qminus1", number(sp.gap_to_qminus1)},
                           {"rayleigh_defect", sp.rayleigh_defect}});
    }
    write_file_atomic(ctx.dir / "spectrum.csv", csv.str());

    Json j = ctx.summary();
    j["ground"] = ground_json(g);
    j["sectors"] = sectors;
    std::string verdict = "no nondegeneracy check (needs ell-max >= 1, m >= 3, lambda = 0)";
    if (c.ell_max >= 1 && c.m >= 3 && c.lambda == 0.0) {
        const NondegeneracyReport r = nondegeneracy_report(g, c.ell_max, c.m);
        j["nondegeneracy"] = {{"passed", r.passed},
                              {"failures", r.failures},
                              {"mu1", r.mu1},
                              {"mu2", r.mu2},
                              {"mu3", r.mu3},
                              {"mu2_simple", r.mu2_simple},
                              {"mu2_odd", r.mu2_odd},
                              {"kappa", r.kappa},
                              {"min_margin", r.min_margin}};
        verdict = std::string("nondegeneracy ") + (r.passed ? "passed" : "FAILED") +
                  ", margin " + format_double(r.min_margin);
    }
    emit(ctx.dir / "spectrum.json", j);
    ctx.out << "spectrum: " << (c.ell_max + 1) << " sectors x " << c.m << " eigenvalues; " << verdict
            << " -> " << ctx.dir.string() << "\n";
    return kExitOk;
}

int cmd_scan(const Context& ctx) {
    const RunConfig& c = ctx.config;
    std::vector<double> lambdas = c.lambdas;
    if (lambdas.empty()) {
        const double lo = -0.9 * ctx.params.hardy, hi = 20.0;
        for (int i = 0; i < 25; ++i) lambdas.push_back(lo + (hi - lo) * i / 24.0);
    }
    for (double l : lambdas)
        if (!(l > -ctx.params.hardy))
            throw std::invalid_argument("every lambda must exceed -H_s = " + format_double(-ctx.params.hardy));
    ScanOptions opt;
    opt.ground_tol = c.tol;
    opt.max_iter = c.max_iter;
    const ScanResult res = stability_scan(ctx.params, lambdas, ctx.grid, opt);

    CsvWriter csv({"lambda", "best_constant", "nu1", "indicator", "converged"});
    bool all = true;
    Json rows = Json::array();
    for (const ScanRow& r : res.rows) {
        csv.cell(r.lambda).cell(r.best_constant).cell(r.nu1).cell(r.indicator).cell(r.converged);
        csv.end_row();
        all = all && r.converged;
        if (!r.converged) rows.push_back({{"lambda", r.lambda}, {"error", r.error}});
    }
    write_file_atomic(ctx.dir / "scan.csv", csv.str());
    Json j = ctx.summary();
    j["converged"] = all;
    j["failed_rows"] = rows;
    if (res.threshold) {
        const ThresholdEstimate& t = *res.threshold;
        j["threshold"] = {{"lambda_star", t.lambda_star},
                          {"indicator", t.indicator},
                          {"bracket", {t.bracket_lo, t.bracket_hi}},
                          {"bisection_steps", t.bisection_steps}};
    } else {
        j["threshold"] = nullptr;
    }
    emit(ctx.dir / "scan.json", j);
    ctx.out << "stability-scan: " << res.rows.size() << " points";
    if (res.threshold)
        ctx.out << ", threshold lambda* = " << format_double(res.threshold->lambda_star);
    else
        ctx.out << ", no sign change";
    ctx.out << (all ? "" : " (some points failed)") << " -> " << ctx.dir.string() << "\n";
    return all ? kExitOk : kExitNotConverged;
}

PerturbationWeight load_weight(const Context& ctx) {
    const RunConfig& c = ctx.config;
    if (c.weight == "gaussian")
        return gaussian_weight(ctx.grid, c.weight_center, c.weight_width, c.weight_height, c.weight_base);
    std::pair<std::vector<double>, std::vector<double>> samples;
    try {
        samples = read_two_column_csv(c.weight);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(std::string("weight: ") + e.what());
    }
    return make_weight(resample_onto(ctx.grid, samples.first, samples.second));
}

int cmd_perturb(const Context& ctx) {
    const RunConfig& c = ctx.config;
    if (ctx.params.lambda != 0.0) throw std::invalid_argument("perturb requires lambda = 0");
    const PerturbationWeight weight = load_weight(ctx);
    const std::vector<double> grid_t = t_log_range(c.t_log_min, c.t_log_max, c.t_log_count);
    const GroundState g = ground_of(ctx);
    if (!g.converged) {
        write_ground(ctx, g, "ground");
        ctx.out << "perturb: ground state did not converge (residual " << format_double(g.residual)
                << ")\n";
        return kExitNotConverged;
    }
    PerturbOptions opt;
    opt.tol = c.tol;
    const ReducedCurve curve = reduced_curve(g, c.eps, weight, grid_t, opt);
    CsvWriter csv({"t_log", "energy", "gamma", "eta_norm", "residual", "converged"});
    bool all = true;
    for (const ReducedPoint& p : curve.points) {
        csv.cell(p.t_log).cell(p.energy).cell(p.gamma).cell(p.eta_norm).cell(p.residual).cell(p.converged);
        csv.end_row();
        all = all && p.converged;
    }
    write_file_atomic(ctx.dir / "curve.csv", csv.str());

    const SolutionSearch found = find_solutions(curve, g, c.eps, weight, opt);
    Json sols = Json::array();
    for (std::size_t i = 0; i < found.solutions.size(); ++i) {
        const VerifiedSolution& s = found.solutions[i];
        const std::string name = "solution_" + std::to_string(i + 1) + ".csv";
        write_file_atomic(ctx.dir / name, profile_csv(s.u));
        sols.push_back({{"eps", c.eps},
                        {"t_log_star", s.t_log},
                        {"energy", s.energy},
                        {"gamma", s.gamma},
                        {"residual", s.residual},
                        {"positive", s.positive},
                        {"type", s.type},
                        {"degenerate", s.degenerate},
                        {"profile", name}});
    }
    Json crit = Json::array();
    for (const CriticalPoint& cp : curve.critical_points)
        crit.push_back({{"t_log", cp.t_log}, {"energy", cp.energy}, {"type", cp.type}});

    Json j = ctx.summary();
    j["ground"] = ground_json(g);
    j["weight"] = {{"gauge", weight.gauge},
                   {"sup_norm", weight.sup_norm},
                   {"limit_zero", weight.limit_zero},
                   {"limit_infinity", weight.limit_infinity}};
    j["eps"] = c.eps;
    j["converged"] = all;
    j["reference_energy"] = curve.reference_energy;
    j["total_variation"] = curve.total_variation;
    j["degenerate"] = curve.degenerate;
    j["critical_points"] = crit;
    j["solutions"] = sols;
    j["spurious"] = found.spurious;
    emit(ctx.dir / "perturb.json", j);
    ctx.out << "perturb: eps = " << format_double(c.eps) << ", " << curve.points.size()
            << " curve points, " << found.solutions.size() << " verified solution(s)"
            << (curve.degenerate ? " (degenerate family)" : "")
            << (all ? "" : " (some points failed)") << " -> " << ctx.dir.string() << "\n";
    return all ? kExitOk : kExitNotConverged;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.command != "symbol" && config.command != "ground" && config.command != "spectrum" &&
            config.command != "stability-scan" && config.command != "perturb")
            throw std::invalid_argument("unknown command '" + config.command + "'");
        if (config.command == "symbol") {
            validate(SymbolQuery{0, 0.0, config.n, config.s});
        }
        const ProblemParams params =
            config.command == "symbol" ? ProblemParams{}
                                       : make_params(config.n, config.s, config.q, config.lambda, config.critical);
        const double L = config.L ? *config.L
                         : config.command == "symbol" ? 30.0
                                                      : default_half_length(params);
        Context ctx{config, out, params, make_grid(L, config.N), config.out_dir};
        fs::create_directories(ctx.dir);
        if (config.command == "symbol") return cmd_symbol(ctx);
        if (config.command == "ground") return cmd_ground(ctx);
        if (config.command == "spectrum") return cmd_spectrum(ctx);
        if (config.command == "stability-scan") return cmd_scan(ctx);
        return cmd_perturb(ctx);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const ConvergenceError& e) {
        err << "not converged: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const SolverFailure& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNotConverged;
    }
}

std::string config_to_json(const RunConfig& config) { return config_json(config).dump(2); }

RunConfig config_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("config JSON: ") + e.what());
    }
    if (j.contains("config")) j = j["config"];
    RunConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const Json& v = it.value();
            if (k == "command") c.command = v.get<std::string>();
            else if (k == "n") c.n = v.get<int>();
            else if (k == "s") c.s = v.get<double>();
            else if (k == "q") c.q = v.get<double>();
            else if (k == "lambda") c.lambda = v.get<double>();
            else if (k == "critical") c.critical = v.get<bool>();
            else if (k == "L") c.L = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            else if (k == "N") c.N = v.get<int>();
            else if (k == "tol") c.tol = v.get<double>();
            else if (k == "max-iter") c.max_iter = v.get<int>();
            else if (k == "ell-max") c.ell_max = v.get<int>();
            else if (k == "m") c.m = v.get<int>();
            else if (k == "tau-max") c.tau_max = v.get<double>();
            else if (k == "tau-step") c.tau_step = v.get<double>();
            else if (k == "lambdas") c.lambdas = v.get<std::vector<double>>();
            else if (k == "eps") c.eps = v.get<double>();
            else if (k == "weight") c.weight = v.get<std::string>();
            else if (k == "weight-center") c.weight_center = v.get<double>();
            else if (k == "weight-width") c.weight_width = v.get<double>();
            else if (k == "weight-height") c.weight_height = v.get<double>();
            else if (k == "weight-base") c.weight_base = v.get<double>();
            else if (k == "t-log-min") c.t_log_min = v.get<double>();
            else if (k == "t-log-max") c.t_log_max = v.get<double>();
            else if (k == "t-log-count") c.t_log_count = v.get<int>();
            else if (k == "out-dir") c.out_dir = v.get<std::string>();
            else throw std::invalid_argument("unknown config key '" + k + "'");
        }
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("config JSON: ") + e.what());
    }
    return c;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Fractional Hardy-Sobolev ground states, spectra and perturbations", "frachs"};
    app.set_config("--config", "", "key=value file (one pair per line, # comments); flags override it");
    app.fallthrough();
    app.require_subcommand(1, 1);

    double L = 0.0;
    app.add_option("--n", c.n, "dimension")->capture_default_str();
    app.add_option("--s", c.s, "fractional order in (0,1)")->capture_default_str();
    app.add_option("--q", c.q, "exponent, 2 < q < 2n/(n-2s)")->capture_default_str();
    app.add_option("--lambda", c.lambda, "Hardy-term coefficient, > -H_s")->capture_default_str();
    app.add_flag("--critical", c.critical, "allow q = 2n/(n-2s) (validation mode)");
    auto* l_opt = app.add_option("--L", L, "half length of the log-radial grid (default from n, s)");
    app.add_option("--N", c.N, "grid size, a power of two")->capture_default_str();
    app.add_option("--tol", c.tol, "solver tolerance")->capture_default_str();
    app.add_option("--max-iter", c.max_iter, "ground-state iteration cap")->capture_default_str();
    app.add_option("--ell-max", c.ell_max, "largest harmonic degree")->capture_default_str();
    app.add_option("-m,--modes", c.m, "eigenvalues per sector")->capture_default_str();
    app.add_option("--tau-max", c.tau_max, "symbol table: largest tau")->capture_default_str();
    app.add_option("--tau-step", c.tau_step, "symbol table: tau spacing")->capture_default_str();
    app.add_option("--lambdas", c.lambdas, "comma-separated lambda values")->delimiter(',');
    app.add_option("--eps", c.eps, "perturbation size")->capture_default_str();
    app.add_option("--weight", c.weight, "'gaussian' or a CSV file with columns zeta,kappa")
        ->capture_default_str();
    app.add_option("--weight-center", c.weight_center)->capture_default_str();
    app.add_option("--weight-width", c.weight_width)->capture_default_str();
    app.add_option("--weight-height", c.weight_height)->capture_default_str();
    app.add_option("--weight-base", c.weight_base)->capture_default_str();
    app.add_option("--t-log-min", c.t_log_min)->capture_default_str();
    app.add_option("--t-log-max", c.t_log_max)->capture_default_str();
    app.add_option("--t-log-count", c.t_log_count)->capture_default_str();
    app.add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();

    for (const char* name : {"symbol", "ground", "spectrum", "stability-scan", "perturb"})
        app.add_subcommand(name)->callback([&c, name] { c.command = name; });
    app.get_subcommand("symbol")->description("tabulate Lambda_ell(tau) as CSV");
    app.get_subcommand("ground")->description("radial ground state and best constant");
    app.get_subcommand("spectrum")->description("linearized spectrum by harmonic sector");
    app.get_subcommand("stability-scan")->description("ell = 1 stability indicator over lambda");
    app.get_subcommand("perturb")->description("reduced energy curve and perturbed solutions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    }
    if (l_opt->count() > 0) c.L = L;
    return run(c, out, err);
}

}  // namespace frachs
