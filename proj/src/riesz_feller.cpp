#include "fracrd/riesz_feller.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracrd/errors.hpp"

namespace fracrd {

void SpaceOperator::validate() const {
    if (!(gamma > 0.0 && gamma <= 2.0))
        throw InvalidParameter("space operator: gamma must lie in (0,2], got " + std::to_string(gamma));
    const double bound = std::min(gamma, 2.0 - gamma);
    if (!(std::fabs(theta) <= bound + 1e-15))
        throw InvalidParameter("space operator: |theta| must be <= min(gamma, 2-gamma) = " + std::to_string(bound) +
                               ", got theta=" + std::to_string(theta));
    if (!(lambda > 0.0)) throw InvalidParameter("space operator: lambda must be > 0, got " + std::to_string(lambda));
}

cplx feller_symbol(const SpaceOperator& op, double k) {
    op.validate();
    if (k == 0.0) return 0.0;
    const double mag = op.gamma == 2.0 ? k * k : std::pow(std::fabs(k), op.gamma);
    if (op.theta == 0.0) return mag;
    const double ph = (k > 0.0 ? 1.0 : -1.0) * op.theta * kPi / 2.0;
    return std::polar(mag, ph);
}

struct RieszFellerQuadrature::Impl {
    SpaceOperator op;
    RFQuadratureOptions opts;
    double x0 = 0.0, x1 = 0.0, h = 1.0;
    double fmax = 0.0;
    std::unique_ptr<boost::math::interpolators::cardinal_quintic_b_spline<double>> spline;

    double sample(double y) const {
        if (y <= x0 || y >= x1) return 0.0;
        return (*spline)(y);
    }
};

RieszFellerQuadrature::RieszFellerQuadrature(UniformSamples f, SpaceOperator op, RFQuadratureOptions opts)
    : impl_(std::make_unique<Impl>()) {
    op.validate();
    if (op.gamma >= 2.0)
        throw InvalidParameter("quadrature realization needs gamma < 2; use the spectral symbol for gamma = 2");
    if (op.gamma == 1.0)
        throw InvalidParameter("quadrature realization excludes gamma = 1; use the spectral symbol");
    if (f.values.size() < 8) throw InsufficientSamples("quadrature realization needs at least 8 samples");
    if (!(f.dx > 0.0)) throw InvalidParameter("sample spacing must be > 0");

    Impl& m = *impl_;
    m.op = op;
    m.opts = opts;
    m.x0 = f.x0;
    m.h = f.dx;
    m.x1 = f.x_max();
    for (double v : f.values) m.fmax = std::max(m.fmax, std::fabs(v));
    const double edge = std::max(std::fabs(f.values.front()), std::fabs(f.values.back()));
    if (edge > opts.decay_tol * m.fmax)
        throw DomainTooSmall("samples have not decayed at the grid ends: |f(edge)|/max|f| = " +
                             std::to_string(edge / m.fmax));
    // the function is taken to vanish with its first two derivatives beyond the grid
    m.spline = std::make_unique<boost::math::interpolators::cardinal_quintic_b_spline<double>>(
        f.values, f.x0, f.dx, std::pair<double, double>{0.0, 0.0}, std::pair<double, double>{0.0, 0.0});
}

RieszFellerQuadrature::~RieszFellerQuadrature() = default;
RieszFellerQuadrature::RieszFellerQuadrature(RieszFellerQuadrature&&) noexcept = default;
RieszFellerQuadrature& RieszFellerQuadrature::operator=(RieszFellerQuadrature&&) noexcept = default;

RFQuadratureValue RieszFellerQuadrature::operator()(double x) const {
    const Impl& m = *impl_;
    if (!(x > m.x0 && x < m.x1))
        throw OutOfRange("quadrature point x=" + std::to_string(x) + " is not strictly inside the sample grid");
    if (m.fmax == 0.0) return {};

    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    const double g = m.op.gamma;
    const bool subtract_slope = g > 1.0;
    const double delta = std::min(1e-3, 0.25 * m.h);

    const double f0 = (*m.spline)(x);
    const double f1 = m.spline->prime(x);
    const double f2 = m.spline->double_prime(x);
    const double eta = std::min({delta, x - m.x0, m.x1 - x}) * 0.5;
    const double f3 = (m.spline->double_prime(x + eta) - m.spline->double_prime(x - eta)) / (2.0 * eta);

    // The spline is a polynomial between knots, so each knot interval is
    // integrated by one Gauss-Kronrod panel in log(xi).
    auto knotwise = [&](auto&& fn, double s, double lo, double hi, double& e) {
        std::vector<double> cuts{lo};
        const double first = s > 0 ? std::ceil((x + lo - m.x0) / m.h) : std::floor((x - lo - m.x0) / m.h);
        for (double i = first;; i += s) {
            const double d = s * (m.x0 + i * m.h - x);
            if (d >= hi) break;
            if (d > lo) cuts.push_back(d);
        }
        cuts.push_back(hi);
        double total = 0.0;
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            double pe = 0.0;
            total += GK::integrate(fn, std::log(cuts[j]), std::log(cuts[j + 1]), 0, 0.0, &pe);
            e += pe;
        }
        return total;
    };

    double err = 0.0;
    auto side = [&](double s) {
        // (0, delta): local Taylor polynomial integrated exactly
        double inner = 0.5 * f2 * std::pow(delta, 2.0 - g) / (2.0 - g) +
                       s * f3 / 6.0 * std::pow(delta, 3.0 - g) / (3.0 - g);
        if (!subtract_slope) inner += s * f1 * std::pow(delta, 1.0 - g) / (1.0 - g);

        // (delta, 1) in u = log(xi)
        auto near = [&](double u) {
            const double xi = std::exp(u);
            double d = m.sample(x + s * xi) - f0;
            if (subtract_slope) d -= s * f1 * xi;
            return d * std::pow(xi, -g);
        };
        const double mid = knotwise(near, s, delta, 1.0, err);

        // finite part of s f1 int_0^1 xi^-g
        const double fp = subtract_slope ? s * f1 / (1.0 - g) : 0.0;

        // (1, R) and the analytic tail beyond the grid
        const double reach = s > 0 ? m.x1 - x : x - m.x0;
        double far = 0.0;
        if (reach > 1.0) {
            auto outer = [&](double u) {
                const double xi = std::exp(u);
                return (m.sample(x + s * xi) - f0) * std::pow(xi, -g);
            };
            far = knotwise(outer, s, 1.0, reach, err);
        }
        const double tail = -f0 * std::pow(std::max(1.0, reach), -g) / g;
        return inner + mid + fp + far + tail;
    };

    const double ip = side(1.0);
    const double im = side(-1.0);
    const double pref = gamma_fn(1.0 + g) / kPi;
    const double cp = std::sin((g + m.op.theta) * kPi / 2.0);
    const double cm = std::sin((g - m.op.theta) * kPi / 2.0);
    RFQuadratureValue out;
    out.value = pref * (cp * ip + cm * im);
    out.error = pref * (std::fabs(cp) + std::fabs(cm)) * err;
    if (!(out.error <= m.opts.tol * std::max(std::fabs(out.value), m.fmax)))
        throw QuadratureFailure("Riesz-Feller quadrature at x=" + std::to_string(x) + ": error estimate " +
                                std::to_string(out.error) + " exceeds tolerance");
    return out;
}

RFQuadratureValue apply_quadrature(const UniformSamples& f, const SpaceOperator& op, double x,
                                   const RFQuadratureOptions& opts) {
    return RieszFellerQuadrature(f, op, opts)(x);
}

}  // namespace fracrd
