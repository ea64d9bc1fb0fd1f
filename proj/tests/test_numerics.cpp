#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "fracrd/caputo.hpp"
#include "fracrd/errors.hpp"
#include "fracrd/quadrature.hpp"
#include "fracrd/riesz_feller.hpp"
#include "fracrd/transforms.hpp"

using namespace fracrd;

namespace {

// -(1/pi) int_0^inf Re[psi(k) f*(k) e^{-ikx}] dk for f = exp(-x^2), f* = sqrt(pi) exp(-k^2/4)
double gaussian_operator_oracle(double gamma, double theta, double x) {
    auto integrand = [&](double k) {
        return std::pow(k, gamma) * std::exp(-0.25 * k * k) * std::cos(k * x - theta * kPi / 2.0);
    };
    double err = 0.0;
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 40.0, 15, 1e-14,
                                                                                     &err);
    return -I / std::sqrt(kPi);
}

UniformSamples gaussian_samples(double L, double h) {
    UniformSamples s;
    s.x0 = -L;
    s.dx = h;
    const int n = static_cast<int>(std::lround(2 * L / h)) + 1;
    for (int i = 0; i < n; ++i) {
        const double x = -L + h * i;
        s.values.push_back(std::exp(-x * x));
    }
    return s;
}

}  // namespace

TEST_CASE("space operator quadrature matches the Fourier multiplier on a Gaussian") {
    const UniformSamples f = gaussian_samples(12.0, 0.01);
    for (double gamma : {0.5, 0.8, 1.5, 1.8}) {
        const double bound = std::min(gamma, 2.0 - gamma);
        for (double theta : {0.0, 0.6 * bound, -0.6 * bound}) {
            SpaceOperator op{gamma, theta, 1.0};
            RieszFellerQuadrature Q(f, op);
            for (double x : {-1.3, 0.0, 0.45, 2.0}) {
                const double ref = gaussian_operator_oracle(gamma, theta, x);
                const RFQuadratureValue v = Q(x);
                INFO("gamma=" << gamma << " theta=" << theta << " x=" << x);
                CHECK(std::fabs(v.value - ref) <= 1e-6);
                CHECK(v.error < 1e-6);
            }
        }
    }
}

TEST_CASE("space operator quadrature rejects bad input") {
    const UniformSamples f = gaussian_samples(12.0, 0.05);
    CHECK_THROWS_AS(apply_quadrature(f, SpaceOperator{1.0, 0.0, 1.0}, 0.0), InvalidParameter);
    CHECK_THROWS_AS(apply_quadrature(f, SpaceOperator{2.0, 0.0, 1.0}, 0.0), InvalidParameter);
    CHECK_THROWS_AS(apply_quadrature(f, SpaceOperator{1.5, 0.9, 1.0}, 0.0), InvalidParameter);
    CHECK_THROWS_AS(apply_quadrature(f, SpaceOperator{1.5, 0.0, 1.0}, 12.0), OutOfRange);
    const UniformSamples narrow = gaussian_samples(2.0, 0.05);
    CHECK_THROWS_AS(apply_quadrature(narrow, SpaceOperator{1.5, 0.0, 1.0}, 0.0), DomainTooSmall);
}

TEST_CASE("feller symbol") {
    CHECK(feller_symbol(SpaceOperator{1.5, 0.0, 1.0}, 0.0) == cplx(0.0));
    CHECK(std::abs(feller_symbol(SpaceOperator{2.0, 0.0, 1.0}, -3.0) - cplx(9.0)) < 1e-15);
    const cplx p = feller_symbol(SpaceOperator{1.5, 0.25, 1.0}, 2.0);
    CHECK(std::abs(p - std::polar(std::pow(2.0, 1.5), 0.125 * kPi)) < 1e-14);
    CHECK(std::abs(feller_symbol(SpaceOperator{1.5, 0.25, 1.0}, -2.0) - std::conj(p)) < 1e-14);
}

namespace {

TimeSeries<double> sample(double (*fn)(double), double dt, std::size_t n) {
    TimeSeries<double> s;
    s.dt = dt;
    for (std::size_t i = 0; i < n; ++i) s.values.push_back(fn(dt * static_cast<double>(i)));
    return s;
}

double lin(double t) { return t; }
double quad(double t) { return t * t; }
double cubic(double t) { return t * t * t; }

double caputo_power(double p, double alpha, double t) {
    return boost::math::tgamma(p + 1.0) / boost::math::tgamma(p + 1.0 - alpha) * std::pow(t, p - alpha);
}

double error_at(double (*fn)(double), double p, double alpha, double dt) {
    const std::size_t n = static_cast<std::size_t>(std::lround(1.0 / dt)) + 1;
    const TimeSeries<double> s = sample(fn, dt, n);
    return std::fabs(caputo_derivative(s, alpha, n - 1) - caputo_power(p, alpha, 1.0));
}

}  // namespace

TEST_CASE("Caputo L1 is exact on linear data") {
    for (double alpha : {0.3, 0.7}) {
        const TimeSeries<double> s = sample(lin, 0.05, 41);
        CHECK(std::fabs(caputo_derivative(s, alpha, 40) - caputo_power(1.0, alpha, 2.0)) < 1e-12);
    }
}

TEST_CASE("Caputo schemes converge at their design order") {
    struct Case {
        double alpha;
        double (*fn)(double);
        double p;
        double order;
    };
    for (const Case& c : {Case{0.4, quad, 2.0, 1.6}, Case{0.8, quad, 2.0, 1.2}, Case{1.3, cubic, 3.0, 1.7},
                          Case{1.7, cubic, 3.0, 1.3}}) {
        const double e1 = error_at(c.fn, c.p, c.alpha, 0.01);
        const double e2 = error_at(c.fn, c.p, c.alpha, 0.005);
        INFO("alpha=" << c.alpha << " e1=" << e1 << " e2=" << e2);
        CHECK(e2 < e1);
        CHECK(std::log2(e1 / e2) > 0.85 * c.order);
    }
}

TEST_CASE("Caputo integer orders are exact on low-degree polynomials") {
    const TimeSeries<double> q = sample(quad, 0.1, 11);
    CHECK(std::fabs(caputo_derivative(q, 1.0, 10) - 2.0) < 1e-12);
    const TimeSeries<double> c = sample(cubic, 0.1, 11);
    CHECK(std::fabs(caputo_derivative(c, 2.0, 10) - 6.0) < 1e-10);
}

TEST_CASE("Caputo derivative of complex data acts componentwise") {
    TimeSeries<cplx> s;
    s.dt = 0.02;
    for (int i = 0; i < 51; ++i) {
        const double t = s.dt * i;
        s.values.push_back(cplx(t * t, -t));
    }
    TimeSeries<double> re{s.t0, s.dt, {}, std::nullopt};
    for (const cplx& v : s.values) re.values.push_back(v.real());
    const cplx v = caputo_derivative(s, 0.6, 50);
    CHECK(std::fabs(v.imag() + caputo_power(1.0, 0.6, 1.0)) < 1e-12);
    CHECK(v.real() == doctest::Approx(caputo_derivative(re, 0.6, 50)).epsilon(1e-14));
}

TEST_CASE("Caputo validation") {
    const TimeSeries<double> s = sample(quad, 0.1, 3);
    CHECK_THROWS_AS(caputo_derivative(s, 0.0, 2), InvalidParameter);
    CHECK_THROWS_AS(caputo_derivative(s, 2.5, 2), InvalidParameter);
    CHECK_THROWS_AS(caputo_derivative(s, 0.5, 1), InsufficientSamples);
    CHECK_THROWS_AS(caputo_derivative(s, 0.5, 3), InsufficientSamples);
    CHECK_THROWS_AS(caputo_derivative(s, 1.5, 2), InsufficientSamples);
}

TEST_CASE("L1 weights") {
    const std::vector<double> b = l1_weights(0.5, 4);
    REQUIRE(b.size() == 4);
    CHECK(b[0] == doctest::Approx(1.0));
    CHECK(b[3] == doctest::Approx(2.0 - std::sqrt(3.0)));
}

TEST_CASE("Talbot inversion of closed-form symbols") {
    const TalbotResult r1 = talbot_invert([](cplx s) { return 1.0 / (s + 1.0); }, 2.0);
    CHECK(std::abs(r1.value - std::exp(-2.0)) < 1e-12);
    const TalbotResult r2 = talbot_invert([](cplx s) { return 1.0 / std::sqrt(s); }, 0.7);
    CHECK(std::abs(r2.value - 1.0 / std::sqrt(kPi * 0.7)) < 1e-12);
    CHECK(std::abs(talbot_invert([](cplx s) { return 1.0 / s; }, 3.0).value - 1.0) < 1e-10);
    for (double alpha : {0.5, 0.9, 1.6}) {
        for (double t : {0.3, 1.0, 3.0}) {
            const TalbotResult r = talbot_invert(
                [&](cplx s) { return std::pow(s, alpha - 1.0) / (std::pow(s, alpha) + 1.0); }, t, 32,
                TalbotOptions{24.0, std::pow(2.0, 1.0 / alpha), 1e-4, 0.0, 1e-12, 1024});
            const cplx ref = mittag_leffler(alpha, -std::pow(t, alpha));
            INFO("alpha=" << alpha << " t=" << t);
            CHECK(std::abs(r.value - ref) < 1e-10);
        }
    }
}

TEST_CASE("Talbot error estimate shrinks as nodes double") {
    // poles at -1 +- 10i sit close to the contour, so convergence is slow enough to observe
    auto G = [](cplx s) { return 1.0 / (s * s + 2.0 * s + 101.0); };
    double prev = 1.0;
    cplx last;
    for (int n : {24, 48, 96}) {
        TalbotOptions o;
        o.fail_rel = 10.0;
        o.singularity_radius = std::sqrt(101.0);
        const TalbotResult r = talbot_invert(G, 1.0, n, o);
        CHECK(r.error < prev);
        if (n > 24) CHECK(std::abs(r.value - last) <= prev);
        prev = r.error;
        last = r.value;
    }
    CHECK(std::abs(last - std::exp(-1.0) * std::sin(10.0) / 10.0) < 1e-12);

    auto F = [](cplx s) { return 1.0 / (s * s + 1.0); };
    TalbotOptions o;
    o.tol = 1e-12;
    o.singularity_radius = 1.0;
    const TalbotResult r = talbot_invert(F, 1.5, 16, o);
    CHECK(std::abs(r.value - std::sin(1.5)) < 1e-11);
    CHECK(r.nodes >= 32);
}

TEST_CASE("Talbot encloses poles on the imaginary axis") {
    TalbotOptions o;
    o.singularity_radius = 10.0;
    o.tol = 1e-12;
    const TalbotResult r = talbot_invert([](cplx s) { return 1.0 / (s * s + 100.0); }, 1.0, 32, o);
    CHECK(std::abs(r.value - std::sin(10.0) / 10.0) < 1e-10);
}

TEST_CASE("Talbot rejects t <= 0") {
    CHECK_THROWS_AS(talbot_invert([](cplx s) { return 1.0 / s; }, 0.0), InvalidParameter);
}

namespace {

SpectralSamples gaussian_spectrum(double dk, double K) {
    SpectralSamples S;
    S.dk = dk;
    const long M = std::lround(K / dk);
    for (long j = -M; j <= M; ++j) {
        const double k = dk * static_cast<double>(j);
        S.values.push_back(std::exp(-k * k));
    }
    return S;
}

}  // namespace

TEST_CASE("Fourier inversion of a Gaussian spectrum") {
    const SpectralSamples S = gaussian_spectrum(0.05, 8.0);
    std::vector<double> x;
    for (int i = -10; i <= 10; ++i) x.push_back(0.5 * i);
    const FourierResult r = fourier_invert(S, x);
    CHECK_FALSE(r.aliasing_warning);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::fabs(r.values[i] - std::exp(-x[i] * x[i] / 4.0) / (2.0 * std::sqrt(kPi))) < 1e-13);
        CHECK(r.imag_residue[i] < 1e-14);
    }
}

TEST_CASE("Fourier inversion satisfies Parseval") {
    const SpectralSamples S = gaussian_spectrum(0.02, 9.0);
    std::vector<double> x;
    const double h = 0.05;
    for (int i = -600; i <= 600; ++i) x.push_back(h * i);
    const FourierResult r = fourier_invert(S, x);
    double lhs = 0.0, rhs = 0.0;
    for (double v : r.values) lhs += v * v * h;
    for (const cplx& v : S.values) rhs += std::norm(v) * S.dk;
    rhs /= 2.0 * kPi;
    CHECK(std::fabs(lhs - rhs) < 1e-10 * rhs);
}

TEST_CASE("Fourier inversion flags truncation and aliasing") {
    const SpectralSamples S = gaussian_spectrum(0.1, 2.0);
    CHECK_THROWS_AS(fourier_invert(S, {0.0}), CutoffTooSmall);
    const SpectralSamples ok = gaussian_spectrum(0.1, 8.0);
    const FourierResult r = fourier_invert(ok, {-20.0, 0.0, 20.0});
    CHECK(r.aliasing_warning);
    CHECK_FALSE(r.warning.empty());
}

TEST_CASE("Gauss-Jacobi rules integrate polynomials against the weight") {
    for (double b : {-0.5, -0.2, 0.3, 0.9}) {
        const QuadratureRule q = gauss_jacobi(12, 0.0, b);
        double I = 0.0, w = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            I += q.weights[i] * q.nodes[i] * q.nodes[i];
            w += q.weights[i];
        }
        const double ref = std::pow(2.0, b + 3) / (b + 3) - std::pow(2.0, b + 3) / (b + 2) + std::pow(2.0, b + 1) / (b + 1);
        CHECK(std::fabs(I - ref) < 1e-13 * std::fabs(ref));
        CHECK(std::fabs(w - std::pow(2.0, b + 1) / (b + 1)) < 1e-13);
    }
    const QuadratureRule q = gauss_jacobi(20, 0.4, -0.3);
    double w = 0.0;
    for (double v : q.weights) w += v;
    CHECK(std::fabs(w - std::pow(2.0, 1.1) * boost::math::beta(1.4, 0.7)) < 1e-13);
}
