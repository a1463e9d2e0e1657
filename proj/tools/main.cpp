#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "resonette/distortion.hpp"
#include "resonette/errors.hpp"
#include "resonette/experiments.hpp"
#include "resonette/grushin.hpp"
#include "resonette/io.hpp"
#include "resonette/ladder.hpp"
#include "resonette/linalg.hpp"
#include "resonette/operator.hpp"
#include "resonette/spectrum.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace resonette;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check = 1;
constexpr int exit_usage = 2;

class Output {
public:
    explicit Output(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
    std::ofstream open(const std::string& name) const {
        std::ofstream f(dir_ / name);
        if (!f) throw cli::ConfigError("cannot write " + (dir_ / name).string());
        return f;
    }
    void text(const std::string& name, const std::string& body) const { open(name) << body << '\n'; }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
    fs::path dir_;
};

json cjson(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return out;
}

int finish(const Output& out, json report, bool passed) {
    report["passed"] = passed;
    out.text("report.json", report.dump(2));
    std::cout << (passed ? "all checks passed" : "check failure") << " (report: " << out.path("report.json") << ")\n";
    return passed ? exit_ok : exit_check;
}

int run_approx(const cli::Config& c, const Output& out) {
    const PotentialSpec v = c.potential("bump");
    ApproximationParams base;
    base.order = 4;
    // Finer panels: the bump's support edge needs them at mu = 0.1.
    base.contour.panel_over_mu = 0.5;
    base.contour.tolerance = 1e-6;
    const ApproximationParams ap = c.approximation(base);
    const auto mu_grid = c.numbers("mu_grid", {0.1, 0.05, 0.025, 0.0125});
    const auto range = c.numbers("x_range", {-4.0, 4.0});
    if (range.size() != 2 || !(range[0] < range[1])) throw cli::ConfigError("x_range must be [a, b] with a < b");
    const auto x = linspace(range[0], range[1], c.integer("n_x", 401));
    const double n_floor = c.number("n_floor", ap.order - 0.5);

    const DecayFitReport fit = verify_approximation(v, ap, mu_grid, x, n_floor);
    const double mu = c.mu(mu_grid.front());
    const auto vmu = build_approximation(v, mu, ap);
    auto csv = out.open("approx.csv");
    write_approximation_csv(csv, *vmu, v, x);

    json rep{{"command", "approx"},
             {"potential", v.name},
             {"order", ap.order},
             {"nu_tilde", vmu->nu_tilde()},
             {"mu_grid", fit.mu_grid},
             {"sup_errors", fit.sup_errors},
             {"slope", fit.slope},
             {"intercept", fit.intercept},
             {"rms_residual", fit.rms_residual},
             {"n_floor", n_floor},
             {"below_tolerance", fit.below_tolerance},
             {"dump_mu", mu},
             {"dump_nodes", vmu->node_count()}};
    return finish(out, rep, fit.passed);
}

int run_spectrum(const cli::Config& c, const Output& out) {
    const PotentialSpec v = c.potential("gaussian_barrier");
    const double h = c.h(0.05);
    const double mu = c.mu(0.1);
    const double theta = c.theta(mu);
    const double lambda0 = c.number("lambda0", 1.0);
    const double n1 = c.number("n1", 1.1);
    const auto g = cli::grid_choice(c);
    const json& w = c.section("window");
    Window window{w.value("re_min", 0.7), w.value("re_max", 0.9), w.value("tau", 0.06)};

    std::shared_ptr<const SectorFunction> vmu;
    const std::string continuation = c.raw().value("continuation", "approximation");
    if (continuation == "exact") {
        if (!v.has_analytic()) throw cli::ConfigError("potential '" + v.name + "' has no exact continuation");
        vmu = std::make_shared<ExactContinuation>(v);
    } else if (continuation == "approximation") {
        vmu = build_approximation(v, mu, c.approximation({}));
    } else {
        throw cli::ConfigError("continuation must be 'approximation' or 'exact'");
    }
    auto profile = profile_for(h, n1, c.number("r0", 1.0));
    ResonanceProblem pb{vmu, profile, h, auto_grid(h, profile->linear_radius(), g.geometry, g.dx_over_h, g.margin, g.scheme), {}};
    SpectrumOptions so;
    so.lambda0 = lambda0;
    so.refine = c.flag("refine", false);
    const ResonanceSet res = compute_resonances(pb, theta, window, so);

    out.text("resonances.json", resonance_table_json(res));
    auto csv = out.open("resonances.csv");
    write_resonance_csv(csv, res);

    const DiscretizedOperator op = pb.assemble(theta);
    if (c.flag("dump_operator", false)) write_operator_dump(out.path("operator"), op);
    const SchurForm schur(op.matrix);
    const Box box{window.re_min, window.re_max, -window.tau, 0.5 * window.tau};
    int raw = 0;
    for (cplx z : schur.eigenvalues())
        if (z.real() > box.re_min && z.real() < box.re_max && z.imag() > box.im_min && z.imag() < box.im_max) ++raw;

    json rep{{"command", "spectrum"}, {"potential", v.name}, {"h", h},          {"mu", mu},
             {"theta", theta},        {"continuation", continuation},           {"fingerprint", res.fingerprint},
             {"count", res.total_count()}, {"raw_count_in_box", raw},           {"rejected", res.rejected.size()}};
    bool passed = true;
    try {
        const ProjectorReport pr = contour_projector(schur, box, c.integer("projector_nodes", 32));
        rep["projector"] = {{"rank", pr.rank}, {"idempotency", pr.idempotency}, {"boundary_gap", pr.boundary_gap}};
        passed = passed && pr.rank == raw;
    } catch (const DomainError& e) {
        rep["projector"] = {{"skipped", e.what()}};
    }
    if (c.flag("grushin", false)) {
        const DiscretizedOperator ref = assemble_reference(op, reference_options_for(v, lambda0, n1));
        const GrushinFamily fam(ref);
        std::vector<cplx> zs;
        for (double x : linspace(box.re_min, box.re_max, 21))
            for (double y : linspace(box.im_min, box.im_max, 11)) zs.emplace_back(x, y);
        const DeterminantTrace tr = determinant_trace(fam, zs, {box});
        auto dcsv = out.open("determinant.csv");
        write_determinant_csv(dcsv, tr);
        auto bcsv = out.open("boxes.csv");
        write_box_counts_csv(bcsv, tr.boxes);
        const BoxCount& bc = tr.boxes.front();
        rep["grushin"] = {{"rank", fam.rank()}, {"winding", bc.winding}, {"poles", bc.poles}, {"zeros", bc.zeros},
                          {"ok", bc.ok},        {"sup_norm_emp", tr.sup_norm_emp}};
        passed = passed && bc.ok && bc.zeros == raw;
    }
    return finish(out, rep, passed);
}

LadderConfig ladder_config(const cli::Config& c) {
    LadderConfig lc = default_ladder_config(c.h(0.09));
    if (c.has("potential")) lc.potential = c.potential("well_in_island");
    lc.approx = c.approximation(lc.approx);
    lc.mu_tilde = c.number("mu_tilde", lc.mu_tilde);
    lc.delta = c.number("delta", lc.delta);
    lc.n_match = c.integer("n_match", lc.n_match);
    lc.c_match = c.number("c_match", lc.c_match);
    lc.kmax = c.integer("kmax", lc.kmax);
    lc.lambda0 = c.number("lambda0", lc.lambda0);
    if (c.has("mu_tilde") || c.has("delta") || c.has("lambda0")) {
        const double sep = 1.05 * omega_diagnostic(lc.mu_tilde);
        lc.j = {lc.lambda0 - sep, lc.lambda0 - sep + 0.97 * std::pow(lc.h, lc.delta)};
        lc.i = {lc.j.lo + sep, lc.j.hi - sep};
    }
    const auto i = c.numbers("I", {lc.i.lo, lc.i.hi});
    const auto j = c.numbers("J", {lc.j.lo, lc.j.hi});
    if (i.size() != 2 || j.size() != 2) throw cli::ConfigError("I and J must be [lo, hi]");
    lc.i = {i[0], i[1]};
    lc.j = {j[0], j[1]};
    return lc;
}

int run_ladder_cmd(const cli::Config& c, const Output& out) {
    const LadderConfig lc = ladder_config(c);
    const LadderResult a = run_ladder(lc);
    std::optional<CrosscheckReport> cross;
    if (c.flag("dual", true)) {
        LadderConfig dual = lc;
        dual.approx.glue_sharpness = c.number("dual_glue_sharpness", 2.5);
        const LadderResult b = run_ladder(dual);
        cross = uniqueness_crosscheck(a.limit, b.limit);
    }
    out.text("ladder.json", ladder_report_json(a, cross ? &*cross : nullptr));
    auto csv = out.open("chain.csv");
    write_chain_csv(csv, a);

    const std::size_t checked = std::min<std::size_t>(3, a.ratios.size());
    bool ratios_ok = true;
    for (std::size_t k = 0; k < checked; ++k) ratios_ok = ratios_ok && a.ratios[k] <= 2.0 * a.ratio_bound;
    json rep{{"command", "ladder"},
             {"h", lc.h},
             {"stop_reason", a.stop_reason},
             {"rungs", a.rungs.size()},
             {"movements", a.movements},
             {"ratios", a.ratios},
             {"ratio_limit", 2.0 * a.ratio_bound},
             {"ratios_ok", ratios_ok},
             {"limit_count", a.limit.expanded().size()}};
    if (cross) {
        rep["crosscheck_flagged"] = cross->flagged;
        rep["crosscheck_max_ratio3"] = cross->max_ratio3;
    }
    return finish(out, rep, ratios_ok && (!cross || !cross->flagged));
}

int run_shape(const cli::Config& c, const Output& out) {
    ShapeConfig sc = default_shape_config();
    if (c.has("potential")) sc.potential = c.potential("well_in_island");
    sc.approx = c.approximation(sc.approx);
    sc.delta = c.number("delta", sc.delta);
    sc.mu_cap = c.mu(sc.mu_cap);
    sc.levels = c.integers("levels", {0, 1});
    sc.eps = c.number("eps", sc.eps);
    const ShapeReport r = run_shape_experiment(c.h_list({0.12, 0.09, 0.07, 0.05}), sc);

    auto csv = out.open("shape.csv");
    csv.precision(17);
    csv << "h,level,mu,theta,re,im,predicted,defect,residual,in_window\n";
    json rows = json::array();
    for (const auto& row : r.rows) {
        csv << row.h << ',' << row.level << ',' << row.mu << ',' << row.theta << ',' << row.rho.real() << ',' << row.rho.imag()
            << ',' << row.predicted << ',' << row.defect << ',' << row.residual << ',' << row.in_window << '\n';
        rows.push_back({{"h", row.h}, {"level", row.level}, {"found", row.found}, {"rho", cjson(row.rho)}, {"defect", row.defect}});
    }
    json rep{{"command", "shape"},
             {"lambda0", r.model.lambda0},
             {"x_b", r.model.x_b},
             {"s0", r.model.s0},
             {"eps", r.eps},
             {"defect_slope", r.defect_fit.slope},
             {"im_slope", r.im_fit.slope},
             {"target_im_slope", r.target_slope},
             {"im_rel_error", r.im_rel_error},
             {"defect_ok", r.defect_ok},
             {"im_ok", r.im_ok},
             {"missing", r.missing},
             {"rows", rows}};
    return finish(out, rep, r.passed());
}

int run_nontrap(const cli::Config& c, const Output& out) {
    NontrapConfig nc = default_nontrap_config();
    if (c.has("potential")) nc.potential = c.potential("sech2");
    nc.approx = c.approximation(nc.approx);
    nc.lambda0 = c.number("lambda0", nc.lambda0);
    nc.eps = c.number("eps", nc.eps);
    nc.c_mu = c.number("c_mu", nc.c_mu);
    json rep{{"command", "nontrap"}, {"potential", nc.potential.name}, {"lambda0", nc.lambda0}};
    NontrapReport r;
    try {
        r = run_nontrapping_experiment(c.h_list({0.12, 0.09, 0.07, 0.05}), nc);
    } catch (const PreconditionError& e) {
        rep["rejected"] = e.what();
        return finish(out, rep, false);
    }
    auto csv = out.open("nontrap.csv");
    csv.precision(17);
    csv << "h,mu,count,min_distance\n";
    for (const auto& row : r.rows) csv << row.h << ',' << row.mu << ',' << row.count << ',' << row.min_distance << '\n';
    rep["classical"] = {{"non_trapping", r.classical.non_trapping},
                        {"samples", r.classical.samples},
                        {"escape_radius", r.classical.escape_radius},
                        {"longest_escape", r.classical.longest_escape}};
    return finish(out, rep, r.passed());
}

int run_verify(const cli::Config& c, const Output& out) {
    json rep{{"command", "verify"}};
    bool passed = true;

    json lemma = json::array();
    for (double lambda : c.numbers("lambdas", {1e2, 1e3, 1e4}))
        for (double r0 : c.numbers("r0s", {1.0, 2.0})) {
            const auto p = build_f_lambda(lambda, r0);
            const LemmaCheck lc = check_profile_conditions(*p, c.integer("n_grid", 10000));
            lemma.push_back({{"lambda", lambda},
                             {"r0", r0},
                             {"support", lc.support_margin},
                             {"linearity", lc.linearity_margin},
                             {"monotone", lc.monotone_margin},
                             {"convexity", lc.convexity_margin},
                             {"c_iv", lc.c_iv},
                             {"c_v", lc.c_v},
                             {"alpha_in_bracket", lc.alpha_in_bracket},
                             {"passed", lc.passed}});
            passed = passed && lc.passed;
        }
    rep["profile_conditions"] = lemma;

    const double h = c.h(0.1);
    const double n1 = c.number("n1", 1.1);
    const auto profile = profile_for(h, n1, c.number("r0", 1.0));
    {
        auto csv = out.open("profile.csv");
        write_profile_csv(csv, *profile, linspace(0.0, profile->linear_radius() + 1.0, 1001));
    }

    const int dim = c.integer("dimension", 2);
    const int n_samples = c.integer("jacobian_samples", 10000);
    std::mt19937_64 rng(c.integer("seed", 11));
    std::uniform_real_distribution<double> ux(-3.0 * profile->linear_radius(), 3.0 * profile->linear_radius()), uxi(-10.0, 10.0),
        uth(0.0, 0.1);
    double worst = -1e300;
    for (int i = 0; i < n_samples; ++i) {
        const DistortionMap map(profile, uth(rng));
        JacobianSample s{Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
        for (int d = 0; d < dim; ++d) {
            s.x[d] = ux(rng);
            s.xi[d] = uxi(rng);
        }
        worst = std::max(worst, jacobian_inequality_check(map, {s}).worst_margin);
    }
    rep["jacobian"] = {{"samples", n_samples}, {"dimension", dim}, {"worst", worst}};
    passed = passed && worst <= 1e-12;

    const PotentialSpec v = c.potential("gaussian_barrier");
    const double mu = c.mu(0.1);
    const double lambda0 = c.number("lambda0", 1.0);
    const auto g = cli::grid_choice(c);
    const auto vmu = build_approximation(v, mu, c.approximation({}));
    const GridSpec grid = auto_grid(h, profile->linear_radius(), g.geometry, g.dx_over_h, g.margin, g.scheme);
    json nr = json::array();
    double worst_nr = 1e300;
    for (double theta : c.numbers("thetas", linspace(0.2 * mu, mu, 5))) {
        const DiscretizedOperator op = assemble_distorted(*vmu, DistortionMap(profile, theta), h, grid);
        const double floor = std::pow(h, n1) * theta;
        for (double im : linspace(floor, floor + 0.2 * lambda0, 5)) {
            const NumericalRangeReport r = numerical_range_bound(op, cplx(lambda0, im), 16, lambda0, n1);
            nr.push_back({{"theta", theta}, {"z", cjson(r.z)}, {"min", r.exact_min}, {"target", r.target}, {"margin", r.margin}});
            worst_nr = std::min(worst_nr, r.margin);
        }
    }
    rep["numerical_range"] = nr;
    rep["numerical_range_worst_margin"] = worst_nr;
    passed = passed && worst_nr >= -1e-10;
    return finish(out, rep, passed);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resonette: resonances of semiclassical Schrodinger operators with non-analytic potentials"};
    // --h is the semiclassical parameter, so help is long-form only.
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    std::string config_path, out_dir = ".";
    cli::Overrides ov;
    double h = 0, mu = 0, theta = 0;

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(const cli::Config&, const Output&);
    };
    const Command commands[] = {
        {"approx", "build V^mu and fit its decay in mu", run_approx},
        {"spectrum", "resonances in a window, with projector and Grushin cross-checks", run_spectrum},
        {"ladder", "mu-ladder limit set and dual-construction cross-check", run_ladder_cmd},
        {"shape", "shape resonances of a well in an island against harmonic and Agmon predictions", run_shape},
        {"nontrap", "resonance-free box at a non-trapping energy", run_nontrap},
        {"verify", "distortion profile, Jacobian and numerical-range checks", run_verify},
    };
    std::vector<CLI::App*> subs;
    for (const auto& cmd : commands) {
        CLI::App* s = app.add_subcommand(cmd.name, cmd.help);
        s->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        s->add_option("--h", h, "semiclassical parameter")->check(CLI::PositiveNumber);
        s->add_option("--mu", mu, "approximation angle")->check(CLI::PositiveNumber);
        s->add_option("--theta", theta, "distortion angle")->check(CLI::PositiveNumber);
        s->add_option("--out", out_dir, "output directory for report.json and CSV files");
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        CLI::App* s = subs[i];
        if (!s->parsed()) continue;
        if (s->count("--h")) ov.h = h;
        if (s->count("--mu")) ov.mu = mu;
        if (s->count("--theta")) ov.theta = theta;
        try {
            const cli::Config cfg = cli::Config::load(config_path, ov);
            const Output out(out_dir);
            return commands[i].fn(cfg, out);
        } catch (const cli::ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return exit_usage;
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return exit_usage;
        } catch (const ValidationError& e) {
            std::cerr << "invalid input: " << e.what() << '\n';
            return exit_usage;
        } catch (const PreconditionError& e) {
            std::cerr << "precondition: " << e.what() << '\n';
            return exit_usage;
        } catch (const LadderAbort& e) {
            std::cerr << "ladder aborted: " << e.what() << '\n' << e.dump() << '\n';
            return exit_check;
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return exit_check;
        } catch (const fs::filesystem_error& e) {
            std::cerr << "output error: " << e.what() << '\n';
            return exit_usage;
        }
    }
    return exit_usage;
}
