// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fracrd/errors.hpp"
#include "fracrd/fd_oracle.hpp"
#include "fracrd/kernels.hpp"
#include "fracrd/residual.hpp"
#include "fracrd/solution.hpp"
#include "fracrd/special_functions.hpp"
#include "fracrd/transforms.hpp"

using namespace fracrd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// Worst imag_residue / max|N| over every real-data field computed by the suite.
struct RealnessLog {
    double worst = 0.0;
    int fields = 0;
    void add(const Field& f) {
        ++fields;
        if (f.max_abs > 0.0) worst = std::max(worst, f.max_imag_residue / f.max_abs);
    }
} realness;

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        for (std::size_t j = 0; j < a.values[i].size(); ++j) m = std::max(m, std::abs(a.values[i][j] - b.values[i][j]));
    return m;
}

// psi(k) = |k|^gamma exp(i sign(k) theta pi / 2)
cplx psi(double k, double gamma, double theta) {
    if (k == 0.0) return 0.0;
    return std::pow(std::abs(k), gamma) * std::exp(cplx(0.0, (k > 0 ? 1.0 : -1.0) * theta * M_PI / 2.0));
}

// ---------------------------------------------------------------------------

Outcome special_function_identities() {
    MLOptions o;
    o.tol = 1e-15;
    double worst = 0.0;
    auto check = [&](cplx got, double want) { worst = std::max(worst, std::abs(got - want)); };
    check(eval_wiman(1.0, 1.0, 1.0, o).value, std::exp(1.0));
    check(eval_wiman(1.0, 2.0, 1.0, o).value, std::exp(1.0) - 1.0);
    check(eval_wiman(2.0, 1.0, -(M_PI / 2) * (M_PI / 2), o).value, 0.0);
    check(eval_prabhakar(2.0, 1.0, 1.0, 1.0, o).value, 2.0 * std::exp(1.0));
    for (double beta : {0.3, 0.8, 1.5})
        for (double gamma : {0.5, 1.0, 2.7})
            for (cplx z : {cplx(0.4, 0.0), cplx(-3.0, 1.0), cplx(25.0, -7.0)})
                check(eval_prabhakar(0.0, beta, gamma, z, o).value, 1.0 / std::tgamma(gamma));
    return {worst <= 1e-12, "max abs error " + sci(worst) + " over 31 identities (bound 1e-12)"};
}

Outcome kernel_vs_talbot() {
    struct Case {
        double alpha, beta;
    };
    const std::vector<Case> orders = {{0.6, 0.3}, {0.9, 0.5}, {1.5, 0.7}, {1.5, 1.2}};
    const std::vector<double> as = {0.0, 0.3, 0.7};
    const std::vector<cplx> bs = {0.5, 3.0, cplx(1.0, 2.0), cplx(4.0, -3.0)};
    const std::vector<double> ts = {0.1, 0.5, 1.0, 2.0, 5.0};
    int points = 0, comparisons = 0;
    double worst = 0.0;
    std::string where;
    // series target: relative 1e-7, absolute 1e-9 once |value| < 1e-2
    KernelOptions ko;
    ko.tol = 1e-7;
    ko.floor = 1e-2;
    int near_zero = 0;
    for (const auto& c : orders)
        for (double a : as)
            for (cplx b : bs)
                for (double t : ts) {
                    ++points;
                    TalbotOptions to;
                    to.poles = denominator_poles(c.alpha, c.beta, a, b);
                    to.tol = 1e-12;
                    to.abs_scale = 1e-14;
                    to.max_nodes = 1024;
                    auto symbol = [&](std::function<cplx(cplx)> num) {
                        return [=](cplx s) {
                            return num(s) / (std::pow(s, c.alpha) + a * std::pow(s, c.beta) + b);
                        };
                    };
                    auto compare = [&](cplx series, const LaplaceSymbol& F, const char* name) {
                        const cplx ref = talbot_invert(F, t, 32, to).value;
                        const double diff = std::abs(series - ref);
                        // relative 1e-6, or absolute 1e-9 where the kernel is near a zero
                        double rel = diff / std::max(std::abs(ref), 1e-300);
                        if (rel > 1e-6 && diff <= 1e-9) {
                            ++near_zero;
                            rel = 0.0;
                        }
                        ++comparisons;
                        if (rel > worst) {
                            worst = rel;
                            std::ostringstream os;
                            os << name << " alpha=" << c.alpha << " beta=" << c.beta << " a=" << a << " b=" << b
                               << " t=" << t;
                            where = os.str();
                        }
                    };
                    const KernelParams p{c.alpha, c.beta, a, b, 1.0};
                    compare(kernel_T(p, t, ko).value, symbol([](cplx) { return cplx(1.0); }), "kernel_T");
                    const double al = c.alpha, be = c.beta;
                    const auto F_f = symbol([=](cplx s) { return std::pow(s, al - 1.0) + a * std::pow(s, be - 1.0); });
                    const auto F_U = symbol([](cplx) { return cplx(1.0); });
                    if (c.alpha <= 1.0) {
                        const SubdiffusionKernels k1 = subdiffusion_time_kernels(p, t, ko);
                        compare(k1.K_f.value, F_f, "K_f");
                        compare(k1.K_U.value, F_U, "K_U");
                    } else {
                        const DiffusionWaveKernels k2 = diffusion_wave_time_kernels(p, t, ko);
                        const double bg = be > 1.0 ? 1.0 : 0.0;
                        const auto F_g = symbol(
                            [=](cplx s) { return std::pow(s, al - 2.0) + bg * a * std::pow(s, be - 2.0); });
                        compare(k2.K_f.value, F_f, "K_f");
                        compare(k2.K_g.value, F_g, "K_g");
                        compare(k2.K_U.value, F_U, "K_U");
                    }
                }
    return {worst <= 1e-6, std::to_string(points) + " parameter points, " + std::to_string(comparisons) +
                               " kernels, max rel diff " + sci(worst) + " at " + where + ", " +
                               std::to_string(near_zero) + " near-zero values within 1e-9 abs (bound 1e-6 rel)"};
}

Outcome greens_anchors() {
    auto at_origin = [](double gamma) {
        Scenario sc;
        sc.orders = OrderParams{1.0, 1.0, 0.0, {SpaceOperator{gamma, 0.0, 1.0}}};
        sc.f = Profile::delta();
        sc.t_points = {1.0};
        sc.x_grid = {0.0};
        const Field f = solve_field(sc);
        realness.add(f);
        return f.values[0][0];
    };
    const double heat = at_origin(2.0), cauchy = at_origin(1.0);
    const double e_heat = std::abs(heat - 1.0 / std::sqrt(4.0 * M_PI));
    const double e_cauchy = std::abs(cauchy - 1.0 / M_PI);
    char buf[200];
    std::snprintf(buf, sizeof buf, "heat N(0,1)=%.9f (err %s), Cauchy N(0,1)=%.9f (err %s), bound 1e-6", heat,
                  sci(e_heat).c_str(), cauchy, sci(e_cauchy).c_str());
    return {e_heat <= 1e-6 && e_cauchy <= 1e-6, buf};
}

struct Benchmark {
    double alpha, beta, a, gamma, theta;
};
const std::vector<Benchmark> kBenchmarks = {
    {0.9, 0.5, 0.7, 1.5, 0.3}, {0.8, 0.4, 0.5, 2.0, 0.0}, {1.5, 0.7, 0.3, 1.8, 0.0}};

Scenario benchmark_scenario(const Benchmark& b) {
    Scenario sc;
    sc.orders = OrderParams{b.alpha, b.beta, b.a, {SpaceOperator{b.gamma, b.theta, 1.0}}};
    if (b.alpha > 1.0) sc.g = Profile::zero_profile();
    return sc;
}

// The x grid spans one full period 2 pi / dk with n dk > 2K, so h sum N is the
// periodic trapezoid integral of the band-limited field; no tail is cut off.
Outcome mass_conservation() {
    const double K = 60.0, P = 200.0;
    const int n = 4096;
    double worst = 0.0;
    int checks = 0;
    for (const auto& b : kBenchmarks) {
        Scenario sc = benchmark_scenario(b);
        sc.f = Profile::delta();
        sc.t_points = {0.5, 1.0, 2.0};
        sc.spectral.K = K;
        sc.spectral.dk = 2.0 * M_PI / P;
        sc.tol.cutoff_decay = 1.0;  // delta data: pointwise Gibbs error is irrelevant to the mass
        const double h = P / n;
        for (int i = 0; i < n; ++i) sc.x_grid.push_back(-P / 2 + h * i);
        const Field f = solve_field(sc);
        realness.add(f);
        for (const auto& row : f.values) {
            double mass = 0.0;
            for (double v : row) mass += v;
            worst = std::max(worst, std::abs(mass * h - 1.0));
            ++checks;
        }
    }
    return {worst < 1e-4, std::to_string(checks) + " (order set, t) pairs, max |mass - 1| = " + sci(worst) +
                              " (bound 1e-4)"};
}

Outcome reduction_lattice() {
    const std::vector<double> xs = linspace(-6.0, 6.0, 49);
    std::ostringstream detail;
    bool pass = true;

    // several operators with a common (gamma, theta) add their lambdas
    {
        Scenario one;
        one.orders = OrderParams{0.7, 0.4, 0.6, {SpaceOperator{1.6, 0.2, 1.0}}};
        one.f = Profile::gaussian(1.0, 0.3, 0.8);
        one.t_points = {0.5, 1.5};
        one.x_grid = xs;
        Scenario split = one;
        split.orders.operators = {SpaceOperator{1.6, 0.2, 0.35}, SpaceOperator{1.6, 0.2, 0.65}};
        const Field a = solve_field(one), b = solve_field(split);
        realness.add(a);
        realness.add(b);
        const double d = max_abs_diff(a, b);
        pass = pass && d <= 1e-6;
        detail << "split operators " << sci(d);
    }

    // a = 0 against E_alpha(-psi t^alpha) times the Gaussian transform, inverted by Simpson's rule
    {
        const double alpha = 0.75, gamma = 1.4, theta = 0.3, w = 1.0, t = 0.8;
        Scenario sc;
        sc.orders = OrderParams{alpha, alpha, 0.0, {SpaceOperator{gamma, theta, 1.0}}};
        sc.f = Profile::gaussian(1.0, 0.0, w);
        sc.t_points = {t};
        sc.x_grid = xs;
        const Field f = solve_field(sc);
        realness.add(f);
        const double Kmax = 14.0;  // exp(-K^2 w^2 / 4) < 1e-21
        const int m = 4000;        // even
        const double hk = 2.0 * Kmax / m;
        double d = 0.0;
        std::vector<cplx> F(static_cast<std::size_t>(m + 1));
        for (int j = 0; j <= m; ++j) {
            const double k = -Kmax + hk * j;
            const cplx fhat = std::sqrt(M_PI) * w * std::exp(-k * k * w * w / 4.0);
            F[static_cast<std::size_t>(j)] = fhat * mittag_leffler(alpha, -psi(k, gamma, theta) * std::pow(t, alpha));
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            cplx s = 0.0;
            for (int j = 0; j <= m; ++j) {
                const double k = -Kmax + hk * j;
                const double wt = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
                s += wt * F[static_cast<std::size_t>(j)] * std::exp(cplx(0.0, -k * xs[i]));
            }
            const double ref = (s * hk / 3.0).real() / (2.0 * M_PI);
            d = std::max(d, std::abs(ref - f.values[0][i]));
        }
        pass = pass && d <= 1e-6;
        detail << ", a=0 vs Mittag-Leffler " << sci(d);
    }

    // orders (2 nu, nu) with gamma = 2: general engine against the two-root path
    for (double nu : {0.5, 0.8, 1.0}) {
        Scenario sc;
        sc.orders = OrderParams{2.0 * nu, nu, 0.9, {SpaceOperator{2.0, 0.0, 1.3}}};
        if (sc.orders.alpha > 1.0) sc.g = Profile::zero_profile();
        sc.f = Profile::gaussian(1.0, 0.0, 1.0);
        sc.U.kind = SourceSpec::Kind::separable;
        sc.U.space = Profile::gaussian(0.5, 1.0, 0.7);
        sc.t_points = {0.5, 1.5};
        sc.x_grid = xs;
        const Field a = solve_field(sc), b = telegraph_solution(sc);
        realness.add(a);
        realness.add(b);
        const double d = max_abs_diff(a, b);
        pass = pass && d <= 1e-6;
        detail << ", telegraph nu=" << nu << " " << sci(d);
    }
    detail << " (bound 1e-6)";
    return {pass, detail.str()};
}

// Classical telegraph mode: u'' + a u' + b u = q, u(0) = u0, u'(0) = 0, by RK4.
double telegraph_mode(double a, double b, double q, double u0, double t) {
    const int n = 20000;
    const double h = t / n;
    double u = u0, v = 0.0;
    auto acc = [&](double uu, double vv) { return q - a * vv - b * uu; };
    for (int i = 0; i < n; ++i) {
        const double k1u = v, k1v = acc(u, v);
        const double k2u = v + 0.5 * h * k1v, k2v = acc(u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        const double k3u = v + 0.5 * h * k2v, k3v = acc(u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        const double k4u = v + h * k3v, k4v = acc(u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    return u;
}

Outcome telegraph_cross_check() {
    const double a = 1.5, lambda = 1.0, w = 1.0, src = 0.4;
    Scenario sc;
    sc.orders = OrderParams{2.0, 1.0, a, {SpaceOperator{2.0, 0.0, lambda}}};
    sc.g = Profile::zero_profile();
    sc.f = Profile::gaussian(1.0, 0.0, w);
    sc.U.kind = SourceSpec::Kind::separable;
    sc.U.space = Profile::gaussian(src, 0.0, w);
    double worst = 0.0;
    int samples = 0;
    for (double t : {0.5, 1.0, 2.0})
        for (int j = 0; j <= 160; ++j) {
            const double k = -20.0 + 0.25 * j;
            const double g = std::sqrt(M_PI) * w * std::exp(-k * k * w * w / 4.0);
            const double ref = telegraph_mode(a, lambda * k * k, src * g, g, t);
            const cplx got = telegraph_spectral(sc, k, t).value;
            worst = std::max(worst, std::abs(got - ref));
            ++samples;
        }
    return {worst <= 1e-5, std::to_string(samples) + " (k,t) samples incl. degenerate k=0.75, max |diff| " +
                               sci(worst) + " (bound 1e-5)"};
}

Outcome srivastava_daoust() {
    std::ostringstream detail;
    const SDConvergence c = sd_converges(sd_reference_instance(1.2, 0.4, 0.9));
    const bool exact = c.converges && c.delta == 0.4 && c.delta_prime == 0.9;
    detail << "delta=" << c.delta << " delta_prime=" << c.delta_prime << (exact ? " exact" : " MISMATCH");

    double worst_k = 0.0;
    for (double alpha : {0.6, 0.9, 1.5})
        for (double beta : {0.3 * alpha, 0.7 * alpha})
            for (double a : {0.3, 0.7})
                for (double b : {0.5, 2.0})
                    for (double t : {0.3, 1.0}) {
                        const KernelParams p{alpha, beta, a, b, 1.0};
                        KernelOptions ko;
                        ko.tol = 1e-13;
                        const cplx ref = kernel_T(p, t, ko).value;
                        const cplx x = -a * std::pow(t, alpha - beta), y = -b * std::pow(t, alpha);
                        const cplx v = sd_eval(sd_kernel_instance(alpha, beta, 1.0), x, y).value * std::pow(t, alpha - 1.0);
                        worst_k = std::max(worst_k, std::abs(v - ref) / std::abs(ref));
                    }
    detail << ", kernel instance rel diff " << sci(worst_k);

    // (m+n)! / (m! n!) x^m y^n / Gamma(a + alpha m + beta n), summed to m, n <= 80
    double worst_b = 0.0;
    const double aa = 1.2, al = 0.4, be = 0.9;
    for (double x : {-0.5, -0.2, 0.3, 0.5})
        for (double y : {-0.5, 0.1, 0.5}) {
            double brute = 0.0;
            for (int m = 0; m <= 80; ++m)
                for (int n = 0; n <= 80; ++n) {
                    const double logc = std::lgamma(m + n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n + 1.0) -
                                        std::lgamma(aa + al * m + be * n);
                    brute += std::exp(logc) * std::pow(x, m) * std::pow(y, n);
                }
            const cplx v = sd_eval(sd_reference_instance(aa, al, be), x, y).value;
            worst_b = std::max(worst_b, std::abs(v - brute));
        }
    detail << ", brute-force abs diff " << sci(worst_b) << " (bounds exact, 1e-8, 1e-10)";
    return {exact && worst_k <= 1e-8 && worst_b <= 1e-10, detail.str()};
}

Outcome fd_cross_validation() {
    std::ostringstream detail;
    bool pass = true;
    for (const auto& b : kBenchmarks) {
        Scenario sc = benchmark_scenario(b);
        sc.f = Profile::gaussian(1.0, 0.0, 1.0);
        sc.t_points = {0.5, 1.0};
        sc.x_grid = linspace(-10.0, 10.0, 81);
        const Field ref = solve_field(sc);
        realness.add(ref);
        FDGrid g;
        g.L = 100.0;
        g.n_x = 2048;
        FDOptions o;
        o.boundary_tol = 1e-3;
        g.dt = 2e-3;
        const Field coarse = solve_fd(sc, g, o);
        g.dt = 1e-3;
        const Field fine = solve_fd(sc, g, o);
        const double d1 = max_abs_diff(ref, coarse), d2 = max_abs_diff(ref, fine);
        const double bound = std::max(5e-3, 0.01 * ref.max_abs);
        const bool ok = d2 <= bound && d1 <= bound && d1 / d2 >= 1.5;
        pass = pass && ok;
        detail << "(" << b.alpha << "," << b.beta << "," << b.a << "," << b.gamma << "," << b.theta << "): "
               << sci(d1) << " -> " << sci(d2) << " ratio " << sci(d1 / d2) << "; ";
    }
    detail << "bounds max(5e-3, 1%) and ratio >= 1.5";
    return {pass, detail.str()};
}

Outcome residual_check() {
    std::ostringstream detail;
    bool pass = true;
    const std::vector<Benchmark> sets = {{0.6, 0.3, 0.5, 1.5, 0.0}, {1.5, 0.7, 0.3, 1.8, 0.0}};
    for (const auto& b : sets) {
        Scenario sc = benchmark_scenario(b);
        sc.f = Profile::gaussian(1.0, 0.0, 1.0);
        sc.tol.cutoff_decay = 1e-6;
        std::vector<double> res;
        // Caputo step and quadrature tolerance refined together
        const std::vector<std::pair<double, double>> levels = {{0.02, 1e-7}, {0.01, 1e-8}, {0.005, 1e-9}};
        for (const auto& [dt, qt] : levels) {
            ResidualOptions o;
            o.dt = dt;
            o.half_width = 20.0;
            o.dx = 0.05;
            o.quadrature_tol = qt;
            res.push_back(pde_residual(sc, 0.5, {-1.0, 0.0, 0.5, 1.5}, o).max_residual);
        }
        const double p1 = std::log2(res[0] / res[1]), p2 = std::log2(res[1] / res[2]);
        pass = pass && p1 >= 1.0 && p2 >= 1.0;
        detail << "(" << b.alpha << "," << b.beta << "): " << sci(res[0]) << ", " << sci(res[1]) << ", "
               << sci(res[2]) << " orders " << sci(p1) << ", " << sci(p2) << "; ";
    }
    detail << "bound order >= 1";
    return {pass, detail.str()};
}

Outcome realness_and_positivity() {
    double min_n = 0.0;
    int densities = 0;
    for (double gamma : {0.8, 1.2, 1.5, 2.0})
        for (double frac : {0.0, 1.0, -0.5}) {
            const double theta = frac * std::min(gamma, 2.0 - gamma);
            if (gamma == 2.0 && frac != 0.0) continue;
            Scenario sc;
            sc.orders = OrderParams{1.0, 1.0, 0.0, {SpaceOperator{gamma, theta, 1.0}}};
            sc.f = Profile::delta();
            sc.t_points = {0.5, 1.0};
            sc.x_grid = linspace(-15.0, 15.0, 121);
            const Field f = solve_field(sc);
            realness.add(f);
            ++densities;
            for (const auto& row : f.values)
                for (double v : row) min_n = std::min(min_n, v);
        }
    const bool pass = realness.worst < 1e-8 && min_n >= -1e-6;
    return {pass, "imag_residue/max|N| " + sci(realness.worst) + " over " + std::to_string(realness.fields) +
                      " fields (bound 1e-8); min N over " + std::to_string(densities) + " stable densities " +
                      sci(min_n) + " (bound -1e-6)"};
}

}  // namespace

// Optional arguments select criteria by number; all run by default.
int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    // criterion 10 runs last so it can include every field computed before it
    const std::vector<Criterion> criteria = {
        {1, "special-function identities", special_function_identities},
        {2, "kernel vs Talbot suite", kernel_vs_talbot},
        {3, "Green's-function anchors", greens_anchors},
        {4, "mass conservation", mass_conservation},
        {5, "reduction lattice", reduction_lattice},
        {6, "telegraph cross-check", telegraph_cross_check},
        {7, "Srivastava-Daoust", srivastava_daoust},
        {8, "finite-difference cross-validation", fd_cross_validation},
        {9, "PDE residual", residual_check},
        {10, "realness and nonnegativity", realness_and_positivity},
    };
    int failed = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("[%s] criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
