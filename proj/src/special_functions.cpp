#include "fracrd/special_functions.hpp"

#include <array>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <quadmath.h>

#include "fracrd/errors.hpp"

namespace fracrd {

namespace {

// Boost's gamma uses a Lanczos approximation with reflection below 1/2.
using GammaPolicy = boost::math::policies::policy<
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::denorm_error<boost::math::policies::ignore_error>,
    boost::math::policies::pole_error<boost::math::policies::ignore_error>,
    boost::math::policies::domain_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>>;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::nearbyint(x); }

bool is_integer(double x) { return x == std::nearbyint(x); }

}  // namespace

double sin_pi(double x) {
    double r = std::fmod(x, 2.0);
    if (r > 1.0) r -= 2.0;
    if (r < -1.0) r += 2.0;
    if (r > 0.5) r = 1.0 - r;
    if (r < -0.5) r = -1.0 - r;
    return std::sin(kPi * r);
}

double gamma_fn(double x) {
    if (is_nonpositive_integer(x)) return std::numeric_limits<double>::quiet_NaN();
    return boost::math::tgamma(x, GammaPolicy());
}

double log_gamma(double x) {
    if (is_nonpositive_integer(x)) return std::numeric_limits<double>::infinity();
    return boost::math::lgamma(x, GammaPolicy());
}

double reciprocal_gamma(double x) {
    if (is_nonpositive_integer(x)) return 0.0;
    if (x > 171.0) return std::exp(-log_gamma(x));
    if (x < -170.0) {
        // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi, large in magnitude
        return sin_pi(x) / kPi * std::exp(log_gamma(1.0 - x));
    }
    return 1.0 / gamma_fn(x);
}

const char* to_string(MLBackend backend) {
    return backend == MLBackend::series ? "series" : "asymptotic";
}

namespace {

// ---------------------------------------------------------------------------
// Power series at three working precisions.

template <class R>
struct RealOps;

template <>
struct RealOps<double> {
    static constexpr double eps = DBL_EPSILON;
    static double exp(double x) { return std::exp(x); }
    static double log(double x) { return std::log(x); }
    static double cos(double x) { return std::cos(x); }
    static double sin(double x) { return std::sin(x); }
    static double lgamma(double x) { return log_gamma(x); }
    static double abs(double x) { return std::fabs(x); }
};

template <>
struct RealOps<long double> {
    static constexpr double eps = static_cast<double>(LDBL_EPSILON);
    static long double exp(long double x) { return std::exp(x); }
    static long double log(long double x) { return std::log(x); }
    static long double cos(long double x) { return std::cos(x); }
    static long double sin(long double x) { return std::sin(x); }
    static long double lgamma(long double x) {
        int sign = 0;
        return ::lgammal_r(x, &sign);
    }
    static long double abs(long double x) { return std::fabs(x); }
};

template <>
struct RealOps<__float128> {
    static constexpr double eps = 1.925929944387235853055977942584927319e-34;
    static __float128 exp(__float128 x) { return ::expq(x); }
    static __float128 log(__float128 x) { return ::logq(x); }
    static __float128 cos(__float128 x) { return ::cosq(x); }
    static __float128 sin(__float128 x) { return ::sinq(x); }
    static __float128 lgamma(__float128 x) { return ::lgammaq(x); }
    static __float128 abs(__float128 x) { return ::fabsq(x); }
};

using Float50 = boost::multiprecision::cpp_bin_float_50;

template <>
struct RealOps<Float50> {
    static constexpr double eps = 1e-49;
    static Float50 exp(const Float50& x) { return boost::multiprecision::exp(x); }
    static Float50 log(const Float50& x) { return boost::multiprecision::log(x); }
    static Float50 cos(const Float50& x) { return boost::multiprecision::cos(x); }
    static Float50 sin(const Float50& x) { return boost::multiprecision::sin(x); }
    static Float50 lgamma(const Float50& x) { return boost::math::lgamma(x); }
    static Float50 abs(const Float50& x) { return boost::multiprecision::abs(x); }
};

// Neumaier-compensated running sum.
template <class R>
struct CompensatedSum {
    R sum = 0;
    R comp = 0;
    void add(R v) {
        const R t = sum + v;
        if (RealOps<R>::abs(sum) >= RealOps<R>::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    R value() const { return sum + comp; }
};

struct SeriesOutcome {
    cplx value{};
    double error = std::numeric_limits<double>::infinity();
    int terms = 0;
    bool converged = false;
};

template <class R>
SeriesOutcome prabhakar_series(double rho, double beta, double gamma, cplx z, double stop_tol,
                               int max_terms) {
    using Ops = RealOps<R>;
    SeriesOutcome out;
    const double az = std::abs(z);
    if (az == 0.0 || rho == 0.0) {
        out.value = reciprocal_gamma(gamma);
        out.error = 2.0 * DBL_EPSILON * std::abs(out.value);
        out.terms = 1;
        out.converged = true;
        return out;
    }

    const R log_az = Ops::log(static_cast<R>(az));
    const R phase = static_cast<R>(std::arg(z));
    const R step_c = Ops::cos(phase), step_s = Ops::sin(phase);
    R rot_c = 1, rot_s = 0;  // cos(n phase), sin(n phase) by angle addition
    const R r_rho = static_cast<R>(rho);
    const R r_beta = static_cast<R>(beta);
    const R r_gamma = static_cast<R>(gamma);

    CompensatedSum<R> re, im;
    R log_poch = 0;  // log((rho)_n / n!)
    double rounding = 0.0;
    double prev_mag = 0.0;
    double last_ratio = 1.0;
    int small_run = 0;

    for (int n = 0; n < max_terms; ++n) {
        const R rn = static_cast<R>(n);
        if (n > 0) log_poch += Ops::log((r_rho + rn - 1) / rn);
        const R lg = Ops::lgamma(rn * r_beta + r_gamma);
        const R log_mag = log_poch + rn * log_az - lg;
        const R mag = Ops::exp(log_mag);
        if (n > 0) {
            const R c = rot_c * step_c - rot_s * step_s;
            rot_s = rot_s * step_c + rot_c * step_s;
            rot_c = c;
        }
        re.add(mag * rot_c);
        im.add(mag * rot_s);

        const double dmag = static_cast<double>(mag);
        // per-term relative error grows with the size of the logs that built it
        rounding += dmag * Ops::eps *
                    (4.0 + 2.0 * n + std::fabs(static_cast<double>(lg)) +
                     std::fabs(static_cast<double>(log_mag)));
        out.terms = n + 1;

        const double partial =
            std::hypot(static_cast<double>(re.value()), static_cast<double>(im.value()));
        if (n > 0 && prev_mag > 0.0) last_ratio = dmag / prev_mag;
        const bool decreasing = n > 0 && dmag <= prev_mag;
        if (decreasing && (dmag <= stop_tol * partial || dmag == 0.0))
            ++small_run;
        else
            small_run = 0;
        prev_mag = dmag;
        if (small_run >= 3) {
            out.converged = true;
            break;
        }
    }

    out.value = cplx(static_cast<double>(re.value()), static_cast<double>(im.value()));
    if (!out.converged) return out;
    const double tail = last_ratio < 1.0 ? prev_mag * last_ratio / (1.0 - last_ratio) : prev_mag;
    out.error = tail + rounding + DBL_EPSILON * std::abs(out.value);
    return out;
}

// ---------------------------------------------------------------------------
// Large-argument expansion for rho = m, a positive integer.
//
// E^m_{b,g}(z) = 1/(m-1)! d^{m-1}/dz^{m-1} E_{b,g'}(z), g' = g - b(m-1). The
// two-parameter function splits into residues at the poles s_k = z^{1/b}
// lying on the principal sheet of the Hankel integrand, and the algebraic
// expansion of the cut integral. Derivatives of the residue terms are taken
// as Taylor coefficients in u = h/z.

// log|1/Gamma(y)| and its sign; `zero` when y is a pole of Gamma.
struct LogRGamma {
    double log_abs = 0.0;
    double sign = 1.0;
    bool zero = false;
    double log_envelope = 0.0;  // same magnitude without the |sin(pi y)| factor
};

LogRGamma log_rgamma(double y) {
    LogRGamma r;
    if (y >= 0.5) {
        r.log_abs = -log_gamma(y);
        r.log_envelope = r.log_abs;
        return r;
    }
    // 1/Gamma(y) = sin(pi y) Gamma(1-y) / pi
    r.log_envelope = log_gamma(1.0 - y) - std::log(kPi);
    const double s = sin_pi(y);
    if (s == 0.0 || is_nonpositive_integer(y)) {
        r.zero = true;
        return r;
    }
    r.log_abs = r.log_envelope + std::log(std::fabs(s));
    r.sign = s > 0.0 ? 1.0 : -1.0;
    return r;
}

struct AsymptoticOutcome {
    cplx value{};
    double error = std::numeric_limits<double>::infinity();
    int terms = 0;
};

AsymptoticOutcome prabhakar_asymptotic(int m, double beta, double gamma, cplx z) {
    AsymptoticOutcome out;
    const double az = std::abs(z);
    const double argz = std::arg(z);
    const double log_az = std::log(az);
    const double gp = gamma - beta * (m - 1);
    const cplx log_z(log_az, argz);

    // Residue part.
    cplx pole_sum = 0.0;
    double pole_err = 0.0;
    const bool no_cut = is_integer(beta) && is_integer(gp);
    const int kmin = static_cast<int>(std::floor((-beta * kPi - argz) / (2.0 * kPi))) - 1;
    const int kmax = static_cast<int>(std::ceil((beta * kPi - argz) / (2.0 * kPi))) + 1;
    constexpr double kCutEps = 1e-12;

    // Taylor coefficients shared by all poles: binomial series of (1+u)^(1/b) and (1+u)^((1-g')/b)
    std::vector<double> bin_root(static_cast<std::size_t>(m), 0.0);
    std::vector<double> bin_pref(static_cast<std::size_t>(m), 0.0);
    {
        const double p1 = 1.0 / beta;
        const double p2 = (1.0 - gp) / beta;
        double c1 = 1.0, c2 = 1.0;
        for (int j = 0; j < m; ++j) {
            if (j > 0) {
                c1 *= (p1 - j + 1) / j;
                c2 *= (p2 - j + 1) / j;
            }
            bin_root[static_cast<std::size_t>(j)] = c1;
            bin_pref[static_cast<std::size_t>(j)] = c2;
        }
    }

    for (int k = kmin; k <= kmax; ++k) {
        const double phi = (argz + 2.0 * kPi * k) / beta;
        if (std::fabs(phi) > kPi + kCutEps) continue;
        const bool on_cut = std::fabs(phi) > kPi - kCutEps;
        const double weight = on_cut ? 0.5 : 1.0;

        const cplx log_s(log_az / beta, phi);
        const cplx s = std::exp(log_s);

        // exp(s((1+u)^(1/b) - 1)) as a power series in u
        std::vector<cplx> ex(static_cast<std::size_t>(m), cplx(0.0));
        ex[0] = 1.0;
        for (int n = 1; n < m; ++n) {
            cplx acc = 0.0;
            for (int j = 1; j <= n; ++j)
                acc += static_cast<double>(j) * s * bin_root[static_cast<std::size_t>(j)] *
                       ex[static_cast<std::size_t>(n - j)];
            ex[static_cast<std::size_t>(n)] = acc / static_cast<double>(n);
        }
        cplx coef = 0.0;
        for (int j = 0; j < m; ++j)
            coef += bin_pref[static_cast<std::size_t>(j)] * ex[static_cast<std::size_t>(m - 1 - j)];
        if (coef == cplx(0.0)) continue;

        const cplx log_contrib = (1.0 - gp) * log_s + s - static_cast<double>(m - 1) * log_z + std::log(coef);
        const cplx contrib = weight * std::exp(log_contrib) / beta;
        pole_sum += contrib;
        if (on_cut && !no_cut) pole_err += std::abs(contrib);
        ++out.terms;
    }

    // Algebraic part: (-1)^m sum_i (m)_i / i! z^(-m-i) / Gamma(g - b(m+i)).
    cplx alg = 0.0;
    double alg_abs = 0.0;
    double log_poch = 0.0;
    double prev_env = std::numeric_limits<double>::infinity();
    double alg_err = 0.0;
    const bool integer_beta = is_integer(beta);
    const double sign_m = (m % 2 == 0) ? 1.0 : -1.0;
    constexpr int kMaxAlgebraic = 600;
    bool stopped = false;
    for (int i = 0; i < kMaxAlgebraic; ++i) {
        if (i > 0) log_poch += std::log(static_cast<double>(m + i - 1) / i);
        const double y = gamma - beta * (m + i);
        const LogRGamma rg = log_rgamma(y);
        const double log_pow = -static_cast<double>(m + i) * log_az;
        const double env = std::exp(log_poch + log_pow + rg.log_envelope);
        const double actual = rg.zero ? 0.0 : std::exp(log_poch + log_pow + rg.log_abs);
        const double next_err = integer_beta ? actual : env;
        const double partial = std::abs(alg + pole_sum);
        if (i >= 2 && env > prev_env) {
            alg_err = next_err;
            stopped = true;
            break;
        }
        if (i >= 1 && next_err <= 1e-17 * partial) {
            alg_err = next_err;
            stopped = true;
            break;
        }
        if (!rg.zero) {
            const double ph = -static_cast<double>(m + i) * argz;
            alg += sign_m * rg.sign * actual * cplx(std::cos(ph), std::sin(ph));
            alg_abs += actual;
        }
        prev_env = env;
        ++out.terms;
    }
    if (!stopped) alg_err = prev_env;

    out.value = pole_sum + alg;
    out.error = alg_err + pole_err + 8.0 * DBL_EPSILON * (alg_abs + std::abs(pole_sum)) * (1.0 + m);
    return out;
}

bool is_positive_integer(double x, int& m) {
    if (x < 1.0 || x > 1e6 || !is_integer(x)) return false;
    m = static_cast<int>(x);
    return true;
}

}  // namespace

MLResult eval_prabhakar(double rho, double beta, double gamma, cplx z, const MLOptions& opts) {
    if (!(beta > 0.0)) throw InvalidParameter("Mittag-Leffler: beta must be > 0, got " + std::to_string(beta));
    if (!(gamma > 0.0)) throw InvalidParameter("Mittag-Leffler: gamma must be > 0, got " + std::to_string(gamma));
    if (!(rho >= 0.0)) throw InvalidParameter("Mittag-Leffler: rho must be >= 0, got " + std::to_string(rho));
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw InvalidParameter("Mittag-Leffler: non-finite argument");

    const double w = std::pow(std::abs(z), 1.0 / beta);
    int m = 0;
    const bool integer_rho = is_positive_integer(rho, m);

    auto accepted = [&](const cplx& v, double err) {
        return std::isfinite(err) && err <= opts.tol * std::max(std::abs(v), opts.abs_scale);
    };

    double best_err = std::numeric_limits<double>::infinity();
    // Ahead of the series the expansion must beat the tolerance by `margin`, since its
    // estimate (first omitted term) can be optimistic by two orders at moderate |z|.
    auto try_asymptotic = [&](MLResult& res, double margin) {
        const AsymptoticOutcome a = prabhakar_asymptotic(m, beta, gamma, z);
        best_err = std::min(best_err, a.error);
        res = {a.value, a.terms, a.error, MLBackend::asymptotic};
        return accepted(a.value, a.error * margin);
    };

    const double stop_tol = std::min(opts.tol, 1e-6) * 1e-3;
    auto try_series = [&](auto tag, MLResult& res) {
        using R = decltype(tag);
        const SeriesOutcome s = prabhakar_series<R>(rho, beta, gamma, z, stop_tol, opts.max_terms);
        best_err = std::min(best_err, s.error);
        res = {s.value, s.terms, s.error, MLBackend::series};
        return s.converged && accepted(s.value, s.error);
    };

    MLResult res;
    if (opts.force_backend == MLBackend::asymptotic) {
        if (!integer_rho || z == cplx(0.0))
            throw InvalidParameter("Mittag-Leffler: asymptotic backend needs positive-integer rho and z != 0");
        try_asymptotic(res, 1.0);
        return res;
    }
    if (opts.force_backend == MLBackend::series) {
        if (try_series(double{}, res) || try_series((long double){}, res) || try_series(__float128{}, res) ||
            try_series(Float50{}, res))
            return res;
        return res;
    }

    const bool asym_ok = integer_rho && z != cplx(0.0);
    if (asym_ok && w > kAsymptoticTrial && try_asymptotic(res, 100.0)) return res;
    if (try_series(double{}, res)) return res;
    if (try_series((long double){}, res)) return res;
    if (opts.wide_precision && try_series(__float128{}, res)) return res;
    if (opts.wide_precision && try_series(Float50{}, res)) return res;
    if (asym_ok && w > kAsymptoticTrial && try_asymptotic(res, 1.0)) return res;

    std::ostringstream msg;
    msg << "Mittag-Leffler E^" << rho << "_{" << beta << "," << gamma << "} at z=" << z << ": best error estimate "
        << best_err << " exceeds " << opts.tol << " * max(|value|, " << opts.abs_scale << ")";
    throw NonConvergence(msg.str());
}

MLResult eval_wiman(double beta, double gamma, cplx z, const MLOptions& opts) {
    return eval_prabhakar(1.0, beta, gamma, z, opts);
}

cplx mittag_leffler(double beta, cplx z, const MLOptions& opts) {
    return eval_prabhakar(1.0, beta, 1.0, z, opts).value;
}

}  // namespace fracrd
