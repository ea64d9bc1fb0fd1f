#include "fracrd/fd_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracrd/errors.hpp"
#include "fracrd/parallel.hpp"

namespace fracrd {

void FDGrid::validate() const {
    if (!(L > 0.0)) throw InvalidParameter("fd grid: L must be > 0");
    if (n_x < 4 || (n_x & (n_x - 1)) != 0) throw InvalidParameter("fd grid: n_x must be a power of two >= 4");
    if (!(dt > 0.0)) throw InvalidParameter("fd grid: dt must be > 0");
}

namespace {

// One Caputo term D^nu u(t_n) = diag * u_n + history(u_0..u_{n-1}).
struct CaputoStencil {
    double nu = 1.0;
    double c = 1.0;           // dt^-nu / Gamma(2-nu), or dt^(1-nu) / Gamma(3-nu) for nu > 1
    std::vector<double> w;    // b_j = (j+1)^p - j^p, p = 1-nu or 2-nu
    double dt = 1.0;

    CaputoStencil(double order, double step, std::size_t n) : nu(order), dt(step) {
        const double p = nu <= 1.0 ? 1.0 - nu : 2.0 - nu;
        c = nu <= 1.0 ? std::pow(dt, -nu) / std::tgamma(2.0 - nu) : std::pow(dt, 1.0 - nu) / std::tgamma(3.0 - nu);
        w.resize(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            const double jd = static_cast<double>(j);
            w[j] = std::pow(jd + 1.0, p) - (j == 0 ? 0.0 : std::pow(jd, p));
        }
    }

    double diag() const { return nu <= 1.0 ? c * w[0] : c * w[0] / dt; }

    // diff[j] = u_j - u_{j-1} for j >= 1; slope0 = u'(0).
    cplx history(const std::vector<cplx>& diff, std::size_t n, const cplx& u_prev, cplx slope0) const {
        if (nu <= 1.0) {
            // c * [b_0 (u_n - u_{n-1}) + sum_{j>=1} b_j diff_{n-j}]
            cplx acc = -w[0] * u_prev;
            for (std::size_t j = 1; j < n; ++j) acc += w[j] * diff[n - j];
            return c * acc;
        }
        // slopes d_m = diff_m / dt, d_0 = slope0; c * sum_j b_j (d_{n-j} - d_{n-j-1})
        auto slope = [&](std::size_t m) { return m == 0 ? slope0 : diff[m] / dt; };
        cplx acc = -w[0] * (u_prev / dt + slope(n - 1));
        for (std::size_t j = 1; j < n; ++j) acc += w[j] * (slope(n - j) - slope(n - j - 1));
        return c * acc;
    }
};

}  // namespace

Field solve_fd(const Scenario& sc, const FDGrid& grid, const FDOptions& opts) {
    sc.validate();
    grid.validate();
    for (double x : sc.x_grid)
        if (std::fabs(x) > grid.L) throw OutOfRange("fd oracle: x=" + std::to_string(x) + " outside [-L, L]");

    const double tmax = sc.t_points.back();
    const std::size_t n_t = grid.n_t > 0 ? grid.n_t : static_cast<std::size_t>(std::ceil(tmax / grid.dt - 1e-9));
    std::vector<std::size_t> out_steps;
    Field field;
    for (double t : sc.t_points) {
        const std::size_t n = std::min<std::size_t>(n_t, std::max<std::size_t>(1, std::lround(t / grid.dt)));
        out_steps.push_back(n);
        field.t_points.push_back(static_cast<double>(n) * grid.dt);
    }
    field.x_grid = sc.x_grid;

    const OrderParams& o = sc.orders;
    const CaputoStencil Da(o.alpha, grid.dt, n_t);
    const CaputoStencil Db(o.beta, grid.dt, n_t);
    const bool coupled = o.a != 0.0;
    const bool forced = sc.U.kind != SourceSpec::Kind::zero;
    const std::size_t modes = grid.n_x / 2;  // m = 0..n_x/2-1; the Nyquist mode is dropped
    const double dk = kPi / grid.L;

    std::vector<std::vector<cplx>> spectra(out_steps.size(), std::vector<cplx>(modes));
    std::vector<double> start_mag(modes), peak_mag(modes);
    parallel_for(modes, [&](std::size_t m) {
        const double k = dk * static_cast<double>(m);
        const cplx b = o.b_star(k);
        const cplx u0 = sc.f.transform(k);
        const cplx g0 = sc.g ? sc.g->transform(k) : cplx(0.0);
        std::vector<cplx> diff(n_t + 1);
        cplx u = u0;
        double peak = std::abs(u0);
        std::size_t next_out = 0;
        const cplx diag = Da.diag() + (coupled ? o.a * Db.diag() : 0.0) + b;
        for (std::size_t n = 1; n <= n_t; ++n) {
            cplx rhs = -Da.history(diff, n, u, g0);
            if (coupled) rhs -= o.a * Db.history(diff, n, u, g0);
            if (forced) rhs += source_transform(sc.U, k, static_cast<double>(n) * grid.dt);
            const cplx next = rhs / diag;
            diff[n] = next - u;
            u = next;
            peak = std::max(peak, std::abs(u));
            while (next_out < out_steps.size() && out_steps[next_out] == n) spectra[next_out++][m] = u;
        }
        start_mag[m] = std::abs(u0);
        peak_mag[m] = peak;
    });

    if (!forced) {
        const double start = *std::max_element(start_mag.begin(), start_mag.end());
        const double peak = *std::max_element(peak_mag.begin(), peak_mag.end());
        if (peak > opts.growth_limit * start) {
            std::ostringstream msg;
            msg << "fd oracle: mode amplitude grew to " << peak << " from " << start << " (dt=" << grid.dt << ")";
            throw StabilityFailure(msg.str());
        }
    }

    // N(x) = (1/2L) sum_m N^_m e^{-i k_m x}, using N^_{-m} = conj(N^_m)
    auto synthesize = [&](const std::vector<cplx>& coef, double x, double& imag) {
        cplx acc = coef[0];
        const cplx step = std::polar(1.0, -dk * x);
        cplx ph = 1.0;
        double im = coef[0].imag();
        for (std::size_t m = 1; m < modes; ++m) {
            ph = (m % 64 == 0) ? std::polar(1.0, -dk * x * static_cast<double>(m)) : ph * step;
            acc += 2.0 * (coef[m] * ph).real();
        }
        imag = std::fabs(im) / (2.0 * grid.L);
        return acc.real() / (2.0 * grid.L);
    };

    const double h = 2.0 * grid.L / static_cast<double>(grid.n_x);
    for (std::size_t it = 0; it < spectra.size(); ++it) {
        std::vector<double> vals(sc.x_grid.size()), imags(sc.x_grid.size());
        for (std::size_t i = 0; i < sc.x_grid.size(); ++i) vals[i] = synthesize(spectra[it], sc.x_grid[i], imags[i]);
        double peak = 0.0, dummy = 0.0;
        for (std::size_t j = 0; j < grid.n_x; ++j)
            peak = std::max(peak, std::fabs(synthesize(spectra[it], -grid.L + h * static_cast<double>(j), dummy)));
        const double edge = std::fabs(synthesize(spectra[it], grid.L, dummy));
        if (edge >= opts.boundary_tol * peak) {
            std::ostringstream msg;
            msg << "fd oracle: |N(L)| / max|N| = " << edge / peak << " at t=" << field.t_points[it]
                << " (needs < " << opts.boundary_tol << "); enlarge L";
            throw BoundaryContamination(msg.str());
        }
        for (double v : vals) field.max_abs = std::max(field.max_abs, std::fabs(v));
        for (double v : imags) field.max_imag_residue = std::max(field.max_imag_residue, v);
        field.values.push_back(std::move(vals));
        field.imag_residue.push_back(std::move(imags));
    }
    field.diagnostics.dk = dk;
    field.diagnostics.K = dk * static_cast<double>(modes - 1);
    field.diagnostics.k_samples = 2 * modes - 1;
    for (std::size_t it = 0; it < sc.t_points.size(); ++it)
        if (std::fabs(field.t_points[it] - sc.t_points[it]) > 1e-12 * sc.t_points[it]) {
            std::ostringstream msg;
            msg << "requested t=" << sc.t_points[it] << " reported at grid time " << field.t_points[it];
            field.diagnostics.warnings.push_back(msg.str());
        }
    return field;
}

}  // namespace fracrd
