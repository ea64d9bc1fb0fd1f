#include "fracrd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "fracrd/errors.hpp"
#include "fracrd/fd_oracle.hpp"
#include "fracrd/kernels.hpp"
#include "fracrd/residual.hpp"
#include "fracrd/scenario_io.hpp"
#include "fracrd/solution.hpp"
#include "fracrd/transforms.hpp"

namespace fracrd {

namespace {

struct Common {
    std::string out;
    std::string backend;
    double tol = 0.0;
    std::string scenario;
};

struct GreensArgs {
    double alpha = 1.0, beta = 1.0, a = 0.0, gamma = 2.0, theta = 0.0, lambda = 1.0;
    std::vector<double> t;
    std::vector<double> x;
    double x_min = -10.0, x_max = 10.0;
    int n_x = 201;
};

struct MLArgs {
    double rho = 1.0, beta = 1.0, gamma = 1.0, z_re = 0.0, z_im = 0.0;
};

struct KernelArgs {
    double alpha = 0.6, beta = 0.3, a = 0.0, b_re = 1.0, b_im = 0.0, rho = 1.0;
    std::vector<double> t{1.0};
};

struct SDArgs {
    double a = 1.2, alpha = 0.4, beta = 0.9, x = 0.3, y = -0.2;
};

std::string num(double v) { return format_number(v); }

std::string short_num(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidParameter("--out: cannot write '" + path + "'");
    f << text;
    if (!f) throw InvalidParameter("--out: write to '" + path + "' failed");
}

// CSV to --out (or `out` when no path is given), report to <out>.report (or `err`).
void emit_field(const Common& c, const Field& field, const std::string& report, std::ostream& out, std::ostream& err) {
    std::ostringstream csv;
    write_field_csv(csv, field);
    if (c.out.empty()) {
        out << csv.str();
        err << report;
    } else {
        write_text(c.out, csv.str());
        write_text(c.out + ".report", report);
    }
}

void emit_report(const Common& c, const std::string& report, std::ostream& out) {
    out << report;
    if (!c.out.empty()) write_text(c.out + ".report", report);
}

void apply_common(const Common& c, Scenario& sc) {
    if (c.backend == "talbot") sc.backend = KernelBackend::talbot;
    if (c.backend == "series") sc.backend = KernelBackend::series;
    if (c.tol > 0.0) sc.tol.kernel = c.tol;
}

std::string describe(const Scenario& sc) {
    std::ostringstream os;
    os << "alpha=" << short_num(sc.orders.alpha) << " beta=" << short_num(sc.orders.beta)
       << " a=" << short_num(sc.orders.a) << "\n";
    for (const auto& op : sc.orders.operators)
        os << "operator lambda=" << short_num(op.lambda) << " gamma=" << short_num(op.gamma)
           << " theta=" << short_num(op.theta) << "\n";
    os << "backend=" << (sc.backend == KernelBackend::series ? "series" : "talbot")
       << " kernel_tol=" << short_num(sc.tol.kernel) << "\n";
    return os.str();
}

std::string diagnostics_report(const Field& f) {
    const auto& d = f.diagnostics;
    std::ostringstream os;
    os << "K=" << num(d.K) << " dk=" << num(d.dk) << " k_samples=" << d.k_samples << "\n";
    os << "kernel_evaluations=" << d.kernel_evaluations << " talbot_fallbacks=" << d.talbot_fallbacks
       << " asymptotic_calls=" << d.asymptotic_calls << " max_kernel_terms=" << d.max_kernel_terms
       << " max_kernel_error=" << num(d.max_kernel_error) << "\n";
    os << "unsettled_convolutions=" << d.unsettled_convolutions << " cutoff_doublings=" << d.cutoff_doublings
       << " refinement_rounds=" << d.refinement_rounds << " refinement_change=" << num(d.refinement_change) << "\n";
    os << "max_abs=" << num(f.max_abs) << " max_imag_residue=" << num(f.max_imag_residue) << "\n";
    for (const auto& s : d.fallback_samples) os << "fallback " << s << "\n";
    for (const auto& w : d.warnings) os << "warning: " << w << "\n";
    return os.str();
}

Scenario scenario_from(const Common& c) {
    if (c.scenario.empty()) throw InvalidParameter("--scenario is required");
    Scenario sc = load_scenario(c.scenario).scenario;
    apply_common(c, sc);
    return sc;
}

int cmd_solve(const Common& c, std::ostream& out, std::ostream& err) {
    const Scenario sc = scenario_from(c);
    const Field f = solve_field(sc);
    emit_field(c, f, "solve\n" + describe(sc) + diagnostics_report(f), out, err);
    return kExitOk;
}

int cmd_greens(const Common& c, const GreensArgs& g, std::ostream& out, std::ostream& err) {
    Scenario sc;
    if (!c.scenario.empty()) {
        sc = load_scenario(c.scenario).scenario;
    } else {
        sc.orders = OrderParams{g.alpha, g.beta, g.a, {SpaceOperator{g.gamma, g.theta, g.lambda}}};
        if (g.t.empty()) throw InvalidParameter("--t is required without --scenario");
        sc.t_points = g.t;
        if (!g.x.empty()) {
            sc.x_grid = g.x;
        } else {
            if (g.n_x < 1) throw InvalidParameter("--n-x must be >= 1");
            for (int i = 0; i < g.n_x; ++i)
                sc.x_grid.push_back(g.n_x == 1 ? g.x_min : g.x_min + (g.x_max - g.x_min) * i / (g.n_x - 1));
        }
    }
    sc.f = Profile::delta();
    sc.g.reset();
    if (sc.orders.alpha > 1.0) sc.g = Profile::zero_profile();
    sc.U = SourceSpec{};
    apply_common(c, sc);
    const Field f = solve_field(sc);
    emit_field(c, f, "greens\n" + describe(sc) + diagnostics_report(f), out, err);
    return kExitOk;
}

int cmd_telegraph(const Common& c, std::ostream& out, std::ostream& err) {
    const Scenario sc = scenario_from(c);
    const Field f = telegraph_solution(sc);
    emit_field(c, f, "telegraph\n" + describe(sc) + diagnostics_report(f), out, err);
    return kExitOk;
}

int cmd_ml(const Common& c, const MLArgs& m, std::ostream& out) {
    MLOptions o;
    if (c.tol > 0.0) o.tol = c.tol;
    const MLResult r = eval_prabhakar(m.rho, m.beta, m.gamma, cplx(m.z_re, m.z_im), o);
    std::ostringstream os;
    os << "E^" << short_num(m.rho) << "_{" << short_num(m.beta) << "," << short_num(m.gamma) << "}(" << num(m.z_re)
       << (m.z_im < 0 ? "" : "+") << num(m.z_im) << "i)\n";
    os << "value_re=" << num(r.value.real()) << " value_im=" << num(r.value.imag()) << "\n";
    os << "backend=" << to_string(r.backend) << " terms=" << r.terms_used << " error_bound=" << num(r.tail_bound)
       << "\n";
    emit_report(c, os.str(), out);
    return kExitOk;
}

int cmd_kernel(const Common& c, const KernelArgs& k, std::ostream& out) {
    KernelParams p{k.alpha, k.beta, k.a, cplx(k.b_re, k.b_im), k.rho};
    p.validate();
    KernelOptions ko;
    if (c.tol > 0.0) ko.tol = c.tol;
    TalbotOptions to;
    to.poles = denominator_poles(p.alpha, p.beta, p.a, p.b);
    to.tol = 1e-12;
    to.abs_scale = 1e-12;
    to.max_nodes = 1024;
    const LaplaceSymbol F = [&](cplx s) {
        return std::pow(s, p.rho - 1.0) / (std::pow(s, p.alpha) + p.a * std::pow(s, p.beta) + p.b);
    };
    std::ostringstream os;
    os << "kernel alpha=" << short_num(p.alpha) << " beta=" << short_num(p.beta) << " a=" << short_num(p.a)
       << " b=" << short_num(p.b.real()) << (p.b.imag() < 0 ? "" : "+") << short_num(p.b.imag())
       << "i rho=" << short_num(p.rho) << "\n";
    os << "poles=" << to.poles.size() << "\n";
    double worst = 0.0;
    for (double t : k.t) {
        const KernelValue s = kernel_T(p, t, ko);
        const TalbotResult tr = talbot_invert(F, t, 32, to);
        const double rel = std::abs(s.value - tr.value) / std::max(std::abs(tr.value), 1e-300);
        worst = std::max(worst, rel);
        os << "t=" << num(t) << " series=" << num(s.value.real()) << "," << num(s.value.imag())
           << " talbot=" << num(tr.value.real()) << "," << num(tr.value.imag()) << " rel_diff=" << num(rel)
           << " series_terms=" << s.terms << " talbot_nodes=" << tr.nodes << "\n";
    }
    os << "max_rel_diff=" << num(worst) << "\n";
    emit_report(c, os.str(), out);
    return kExitOk;
}

int cmd_sd(const Common& c, const SDArgs& s, std::ostream& out) {
    const SDParams p = sd_reference_instance(s.a, s.alpha, s.beta);
    const SDConvergence conv = sd_converges(p);
    std::ostringstream os;
    os << "delta=" << short_num(conv.delta) << " delta_prime=" << short_num(conv.delta_prime)
       << " converges=" << (conv.converges ? "true" : "false") << "\n";
    if (conv.converges) {
        SDOptions o;
        if (c.tol > 0.0) o.tol = c.tol;
        const SDValue v = sd_eval(p, s.x, s.y, o);
        os << "x=" << num(s.x) << " y=" << num(s.y) << " value_re=" << num(v.value.real())
           << " value_im=" << num(v.value.imag()) << " order=" << v.order << " error=" << num(v.error) << "\n";
    }
    emit_report(c, os.str(), out);
    return kExitOk;
}

double max_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        for (std::size_t j = 0; j < a.values[i].size(); ++j) m = std::max(m, std::abs(a.values[i][j] - b.values[i][j]));
    return m;
}

int cmd_verify(const Common& c, std::ostream& out, std::ostream& err) {
    if (c.scenario.empty()) throw InvalidParameter("--scenario is required");
    ScenarioBundle bundle = load_scenario(c.scenario);
    Scenario& sc = bundle.scenario;
    apply_common(c, sc);
    bundle.fd.validate();

    const Field fd1 = solve_fd(sc, bundle.fd, bundle.fd_options);
    FDGrid half = bundle.fd;
    half.dt *= 0.5;
    half.n_t *= 2;
    Scenario at_fd = sc;
    at_fd.t_points = fd1.t_points;
    const Field fd2 = solve_fd(at_fd, half, bundle.fd_options);
    const Field field = solve_field(at_fd);

    const double d1 = max_diff(field, fd1);
    const double d2 = max_diff(field, fd2);
    const double bound = std::max(5e-3, 0.01 * field.max_abs);
    std::ostringstream os;
    os << "verify\n" << describe(sc) << diagnostics_report(field);
    os << "fd L=" << num(bundle.fd.L) << " n_x=" << bundle.fd.n_x << " dt=" << num(bundle.fd.dt) << "\n";
    for (const auto& w : fd1.diagnostics.warnings) os << "fd warning: " << w << "\n";
    os << "discrepancy dt=" << num(bundle.fd.dt) << " max_abs_diff=" << num(d1) << "\n";
    os << "discrepancy dt=" << num(half.dt) << " max_abs_diff=" << num(d2) << "\n";
    os << "refinement_ratio=" << num(d2 > 0.0 ? d1 / d2 : INFINITY) << "\n";
    os << "agreement=" << (d2 <= bound ? "pass" : "fail") << " bound=" << num(bound) << "\n";

    if (bundle.residual.T > 0.0) {
        const ResidualReport r = pde_residual(sc, bundle.residual.T, bundle.residual.x, bundle.residual.options);
        os << "residual T=" << num(r.T) << " dt=" << num(bundle.residual.options.dt)
           << " max_residual=" << num(r.max_residual) << " max_abs=" << num(r.max_abs) << "\n";
        for (std::size_t i = 0; i < r.x.size(); ++i)
            os << "residual x=" << num(r.x[i]) << " value=" << num(r.residual[i]) << "\n";
    }
    emit_field(c, field, os.str(), out, err);
    return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool field_command) {
    sub->add_option("--out", c.out, "output path (CSV; diagnostics go to PATH.report)");
    sub->add_option("--tol", c.tol, "tolerance override")->check(CLI::PositiveNumber);
    if (field_command) {
        sub->add_option("--backend", c.backend, "time-kernel backend")->check(CLI::IsMember({"series", "talbot"}));
        sub->add_option("--scenario", c.scenario, "scenario file");
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional reaction-diffusion solver"};
    app.require_subcommand(1);
    Common common;
    GreensArgs greens;
    MLArgs ml;
    KernelArgs kernel;
    SDArgs sd;

    auto* solve = app.add_subcommand("solve", "solve a scenario file");
    add_common(solve, common, true);
    auto* gr = app.add_subcommand("greens", "fundamental solution (delta initial data)");
    add_common(gr, common, true);
    gr->add_option("--alpha", greens.alpha);
    gr->add_option("--beta", greens.beta);
    gr->add_option("--a", greens.a);
    gr->add_option("--gamma", greens.gamma);
    gr->add_option("--theta", greens.theta);
    gr->add_option("--lambda", greens.lambda);
    gr->add_option("--t", greens.t, "output times");
    gr->add_option("--x", greens.x, "explicit x points");
    gr->add_option("--x-min", greens.x_min);
    gr->add_option("--x-max", greens.x_max);
    gr->add_option("--n-x", greens.n_x);
    auto* tel = app.add_subcommand("telegraph", "two-root solution for orders (2 nu, nu)");
    add_common(tel, common, true);
    auto* mlc = app.add_subcommand("ml", "three-parameter Mittag-Leffler function");
    add_common(mlc, common, false);
    mlc->add_option("--rho", ml.rho);
    mlc->add_option("--beta", ml.beta);
    mlc->add_option("--gamma", ml.gamma);
    mlc->add_option("--z-re", ml.z_re);
    mlc->add_option("--z-im", ml.z_im);
    auto* ker = app.add_subcommand("kernel", "time kernel series against Talbot inversion");
    add_common(ker, common, false);
    ker->add_option("--alpha", kernel.alpha);
    ker->add_option("--beta", kernel.beta);
    ker->add_option("--a", kernel.a);
    ker->add_option("--b-re", kernel.b_re);
    ker->add_option("--b-im", kernel.b_im);
    ker->add_option("--rho", kernel.rho);
    ker->add_option("--t", kernel.t, "times");
    auto* sdc = app.add_subcommand("sd", "Srivastava-Daoust convergence and evaluation");
    add_common(sdc, common, false);
    sdc->add_option("--a", sd.a);
    sdc->add_option("--alpha", sd.alpha);
    sdc->add_option("--beta", sd.beta);
    sdc->add_option("--x", sd.x);
    sdc->add_option("--y", sd.y);
    auto* ver = app.add_subcommand("verify", "finite-difference cross-check and residual report");
    add_common(ver, common, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        if (solve->parsed()) return cmd_solve(common, out, err);
        if (gr->parsed()) return cmd_greens(common, greens, out, err);
        if (tel->parsed()) return cmd_telegraph(common, out, err);
        if (mlc->parsed()) return cmd_ml(common, ml, out);
        if (ker->parsed()) return cmd_kernel(common, kernel, out);
        if (sdc->parsed()) return cmd_sd(common, sd, out);
        if (ver->parsed()) return cmd_verify(common, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitValidation;
}

}  // namespace fracrd
