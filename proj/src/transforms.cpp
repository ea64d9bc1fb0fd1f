#include "fracrd/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracrd/errors.hpp"

namespace fracrd {

namespace {

struct ContourSum {
    cplx value;
    double magnitude;  // sum of |terms|, for the rounding floor
};

constexpr double c0 = -0.6122, c1 = 0.5017, c2 = 0.6407, c3 = 0.2645;

ContourSum talbot_sum(const LaplaceSymbol& F, double t, int n, double mu) {
    cplx acc = 0.0;
    double mag = 0.0;
    for (int j = 0; j < n; ++j) {
        const double th = -kPi + (j + 0.5) * 2.0 * kPi / n;
        const double cot = 1.0 / std::tan(c2 * th);
        const double sn = std::sin(c2 * th);
        const cplx s = mu * cplx(c0 + c1 * th * cot, c3 * th);
        const cplx ds = mu * cplx(c1 * cot - c1 * c2 * th / (sn * sn), c3);
        const cplx term = std::exp(s * t) * F(s) * ds;
        acc += term;
        mag += std::abs(term);
    }
    // (1/(2 pi i)) * (2 pi / n) * sum
    return {acc / cplx(0.0, static_cast<double>(n)), mag / n};
}

// Real part of the contour at height y, or -inf when the contour never reaches it.
double contour_re(double mu, double y) {
    const double th = std::fabs(y) / (mu * c3);
    if (th >= 0.97 * kPi) return -std::numeric_limits<double>::infinity();
    if (th < 1e-12) return mu * (c0 + c1 / c2);
    return mu * (c0 + c1 * th / std::tan(c2 * th));
}

double contour_scale(const TalbotOptions& opts, double t) {
    double mu = std::max(opts.design_order, 5.0 * opts.singularity_radius * t) / t;
    for (const cplx& p : opts.poles) {
        const double margin = 0.2 * std::abs(p) + 1.0 / t;
        for (int guard = 0; guard < 400 && contour_re(mu, p.imag()) < p.real() + margin; ++guard) mu *= 1.05;
    }
    return mu;
}

}  // namespace

TalbotResult talbot_invert(const LaplaceSymbol& F, double t, int nodes, const TalbotOptions& opts) {
    if (!(t > 0.0)) throw InvalidParameter("Talbot inversion needs t > 0, got " + std::to_string(t));
    if (nodes < 16) throw InvalidParameter("Talbot inversion needs at least 16 nodes");

    const double mu = contour_scale(opts, t);
    constexpr double eps = std::numeric_limits<double>::epsilon();

    TalbotResult res;
    ContourSum coarse = talbot_sum(F, t, nodes, mu);
    for (;;) {
        const ContourSum fine = talbot_sum(F, t, 2 * nodes, mu);
        res.value = fine.value;
        res.nodes = 2 * nodes;
        res.error = std::abs(fine.value - coarse.value) + 8.0 * eps * fine.magnitude;
        const double scale = std::max(std::abs(res.value), opts.abs_scale);
        if (!std::isfinite(res.value.real()) || !std::isfinite(res.value.imag())) break;
        if (opts.tol <= 0.0 || res.error <= opts.tol * scale || nodes * 4 > opts.max_nodes) break;
        coarse = fine;
        nodes *= 2;
    }
    const double scale = std::max(std::abs(res.value), opts.abs_scale);
    if (!(res.error <= opts.fail_rel * scale)) {
        std::ostringstream msg;
        msg << "Talbot inversion at t=" << t << " with " << res.nodes
            << " nodes: node-doubling discrepancy " << res.error << " exceeds " << opts.fail_rel << " relative";
        throw ContourFailure(msg.str());
    }
    return res;
}

FourierResult fourier_invert(const SpectralSamples& samples, const std::vector<double>& x_grid,
                             const FourierOptions& opts) {
    const std::size_t n = samples.values.size();
    if (n < 3 || n % 2 == 0) throw InvalidParameter("spectral grid must have an odd number (>= 3) of samples");
    if (!(samples.dk > 0.0)) throw InvalidParameter("spectral spacing dk must be > 0");

    double fmax = 0.0;
    for (const cplx& v : samples.values) fmax = std::max(fmax, std::abs(v));
    FourierResult out;
    out.values.assign(x_grid.size(), 0.0);
    out.imag_residue.assign(x_grid.size(), 0.0);
    if (fmax == 0.0) return out;

    const double edge = std::max(std::abs(samples.values.front()), std::abs(samples.values.back()));
    if (edge >= opts.decay_tol * fmax) {
        std::ostringstream msg;
        msg << "spectral cutoff K=" << samples.cutoff() << " too small: |F(+-K)|/max|F| = " << edge / fmax
            << " (needs < " << opts.decay_tol << ")";
        throw CutoffTooSmall(msg.str());
    }

    double xmax = 0.0;
    for (double x : x_grid) xmax = std::max(xmax, std::fabs(x));
    if (samples.dk * xmax > kPi / 4.0) {
        out.aliasing_warning = true;
        std::ostringstream msg;
        msg << "aliasing: dk*max|x| = " << samples.dk * xmax << " exceeds pi/4";
        out.warning = msg.str();
    }

    const double dk = samples.dk;
    const double k0 = samples.k(0);
    constexpr std::size_t kResync = 64;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid[i];
        const cplx step = std::polar(1.0, -dk * x);
        cplx phase;
        cplx acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j % kResync == 0)
                phase = std::polar(1.0, -(k0 + static_cast<double>(j) * dk) * x);
            else
                phase *= step;
            const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
            acc += w * samples.values[j] * phase;
        }
        acc *= dk / (2.0 * kPi);
        out.values[i] = acc.real();
        out.imag_residue[i] = std::fabs(acc.imag());
    }
    return out;
}

}  // namespace fracrd
