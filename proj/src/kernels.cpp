#include "fracrd/kernels.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>
#include <string>

#include "fracrd/errors.hpp"

namespace fracrd {

namespace {

struct ComplexAccumulator {
    double re = 0.0, re_c = 0.0, im = 0.0, im_c = 0.0;
    static void add(double& s, double& c, double v) {
        const double t = s + v;
        if (std::fabs(s) >= std::fabs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    void add(cplx v) {
        add(re, re_c, v.real());
        add(im, im_c, v.imag());
    }
    cplx value() const { return {re + re_c, im + im_c}; }
};

std::string describe(const KernelParams& p, double t) {
    std::ostringstream os;
    os << "(alpha=" << p.alpha << ", beta=" << p.beta << ", a=" << p.a << ", b=" << p.b << ", rho=" << p.rho
       << ", t=" << t << ")";
    return os.str();
}

void check_time(double t, const char* what) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw InvalidParameter(std::string(what) + " must be a finite positive time, got " + std::to_string(t));
}

// Sum without the t^(alpha-rho) prefactor; `floor` is in the same (reduced) units.
// One pass with per-term Mittag-Leffler tolerance `term_tol`; no acceptance check.
KernelValue reduced_series_pass(const KernelParams& p, double t, double tol, double term_tol, double floor,
                                int max_terms, bool wide) {
    const cplx z = -p.b * std::pow(t, p.alpha);
    KernelValue out;

    auto ml = [&](double rho, double gamma, cplx arg, double scale_floor) {
        MLOptions mo;
        mo.tol = term_tol;
        mo.abs_scale = scale_floor;
        mo.wide_precision = wide;
        MLResult r;
        try {
            r = eval_prabhakar(rho, p.alpha, gamma, arg, mo);
        } catch (const NonConvergence&) {
            // a looser per-term budget is still checked against the kernel tolerance below
            mo.tol = 100.0 * tol;
            r = eval_prabhakar(rho, p.alpha, gamma, arg, mo);
        }
        if (r.backend == MLBackend::asymptotic) ++out.asymptotic_calls;
        out.ml_terms_max = std::max(out.ml_terms_max, r.terms_used);
        return r;
    };

    if (p.a == 0.0 || p.alpha == p.beta) {
        const double scale = 1.0 / (1.0 + p.a);
        const MLResult r = ml(1.0, p.alpha - p.rho + 1.0, z * scale, floor / scale);
        out.value = scale * r.value;
        out.error = scale * r.tail_bound;
        out.terms = 1;
    } else {
        const double x = -p.a * std::pow(t, p.alpha - p.beta);
        ComplexAccumulator acc;
        double coeff = 1.0;  // x^r
        double err_sum = 0.0, abs_sum = 0.0;
        double prev = 0.0, last = 0.0, ratio = 1.0;
        int small_run = 0;
        bool done = false;
        for (int r = 0; r < max_terms; ++r) {
            if (r > 0) coeff *= x;
            if (coeff == 0.0) {
                done = true;
                break;
            }
            const double gamma = p.alpha + (p.alpha - p.beta) * r - p.rho + 1.0;
            // later terms only need accuracy relative to the sum built so far
            const double scale = std::max(floor, std::abs(acc.value()));
            const MLResult e = ml(r + 1.0, gamma, z, scale / std::fabs(coeff));
            const cplx term = coeff * e.value;
            acc.add(term);
            const double mag = std::abs(term);
            err_sum += std::fabs(coeff) * e.tail_bound;
            abs_sum += mag;
            out.terms = r + 1;
            prev = last;
            last = mag;
            if (r > 0 && prev > 0.0) ratio = last / prev;
            const double partial = std::max(std::abs(acc.value()), floor);
            if (mag <= 1e-3 * tol * partial && r > 0 && ratio < 1.0)
                ++small_run;
            else
                small_run = 0;
            if (small_run >= 3) {
                done = true;
                break;
            }
        }
        if (!done)
            throw NonConvergence("kernel r-series did not converge within " + std::to_string(max_terms) +
                                 " terms at " + describe(p, t));
        out.value = acc.value();
        const double tail = ratio < 1.0 ? last * ratio / (1.0 - ratio) : last;
        out.error = tail + err_sum + 4.0 * DBL_EPSILON * abs_sum;
    }
    return out;
}

// Per-term errors are relative to each term, so cancellation across r can leave the
// sum short of `tol`; the pass is then repeated with the per-term target tightened by
// the shortfall.
KernelValue reduced_series(const KernelParams& p, double t, double tol, double floor, int max_terms, bool wide) {
    double term_tol = 0.1 * tol;
    KernelValue out;
    for (int pass = 0; pass < 3; ++pass) {
        out = reduced_series_pass(p, t, tol, term_tol, floor, max_terms, wide);
        const double allowed = tol * std::max(std::abs(out.value), floor);
        if (out.error <= allowed) return out;
        if (!std::isfinite(out.error) || term_tol <= 1e-15) break;
        term_tol = std::max(1e-15, term_tol * std::max(1e-4, 0.5 * allowed / out.error));
    }
    std::ostringstream os;
    os << "kernel series error estimate " << out.error << " exceeds tolerance at " << describe(p, t);
    throw NonConvergence(os.str());
}

KernelValue scaled(KernelValue v, double s) {
    v.value *= s;
    v.error *= std::fabs(s);
    return v;
}

KernelValue combine(const KernelValue& u, const KernelValue& v, double cv) {
    KernelValue out;
    out.value = u.value + cv * v.value;
    out.error = u.error + std::fabs(cv) * v.error;
    out.terms = std::max(u.terms, v.terms);
    out.asymptotic_calls = u.asymptotic_calls + v.asymptotic_calls;
    out.ml_terms_max = std::max(u.ml_terms_max, v.ml_terms_max);
    return out;
}

KernelParams with_rho(KernelParams p, double rho) {
    p.rho = rho;
    return p;
}

}  // namespace

void KernelParams::validate() const {
    if (!(alpha > 0.0)) throw InvalidParameter("kernel: alpha must be > 0, got " + std::to_string(alpha));
    if (!(beta > 0.0 && beta <= alpha))
        throw InvalidParameter("kernel: beta must satisfy 0 < beta <= alpha, got beta=" + std::to_string(beta) +
                               " alpha=" + std::to_string(alpha));
    if (!(a >= 0.0)) throw InvalidParameter("kernel: a must be >= 0, got " + std::to_string(a));
    if (!(alpha - rho > -1.0))
        throw InvalidParameter("kernel: alpha - rho must exceed -1, got rho=" + std::to_string(rho));
    if (!std::isfinite(b.real()) || !std::isfinite(b.imag())) throw InvalidParameter("kernel: b must be finite");
}

KernelValue kernel_T_reduced(const KernelParams& p, double t, const KernelOptions& opts) {
    p.validate();
    check_time(t, "kernel time t");
    return reduced_series(p, t, opts.tol, opts.floor, opts.max_terms, opts.wide_precision);
}

KernelValue kernel_T(const KernelParams& p, double t, const KernelOptions& opts) {
    p.validate();
    check_time(t, "kernel time t");
    const double pref = std::pow(t, p.alpha - p.rho);
    return scaled(reduced_series(p, t, opts.tol, opts.floor / pref, opts.max_terms, opts.wide_precision), pref);
}

KernelValue kernel_f(const KernelParams& p, double t, const KernelOptions& opts) {
    p.validate();
    check_time(t, "kernel time t");
    if (p.alpha > 2.0) throw InvalidParameter("kernel_f: alpha must be <= 2");
    if (p.b == cplx(0.0)) {
        // (s^(alpha-1) + a s^(beta-1)) / (s^alpha + a s^beta) = 1/s
        KernelValue one;
        one.value = 1.0;
        one.terms = 1;
        return one;
    }
    const KernelValue first = kernel_T(with_rho(p, p.alpha), t, opts);
    if (p.a == 0.0) return first;
    return combine(first, kernel_T(with_rho(p, p.beta), t, opts), p.a);
}

KernelValue kernel_g(const KernelParams& p, double t, const KernelOptions& opts) {
    p.validate();
    check_time(t, "kernel time t");
    if (!(p.alpha > 1.0 && p.alpha <= 2.0))
        throw InvalidParameter("kernel_g: alpha must lie in (1,2], got " + std::to_string(p.alpha));
    const bool beta_term = p.beta > 1.0 && p.a != 0.0;
    if (p.b == cplx(0.0) && (beta_term || p.a == 0.0)) {
        KernelValue lin;
        lin.value = t;
        lin.terms = 1;
        return lin;
    }
    const KernelValue first = kernel_T(with_rho(p, p.alpha - 1.0), t, opts);
    if (!beta_term) return first;
    return combine(first, kernel_T(with_rho(p, p.beta - 1.0), t, opts), p.a);
}

KernelValue kernel_U_reduced(const KernelParams& p, double xi, const KernelOptions& opts) {
    return kernel_T_reduced(with_rho(p, 1.0), xi, opts);
}

KernelValue kernel_U(const KernelParams& p, double xi, const KernelOptions& opts) {
    return kernel_T(with_rho(p, 1.0), xi, opts);
}

SubdiffusionKernels subdiffusion_time_kernels(const KernelParams& p, double t, const KernelOptions& opts) {
    if (p.alpha > 1.0)
        throw InvalidParameter("these kernels need 0 < alpha <= 1, got alpha=" + std::to_string(p.alpha));
    return {kernel_f(p, t, opts), kernel_U(p, t, opts)};
}

DiffusionWaveKernels diffusion_wave_time_kernels(const KernelParams& p, double t, const KernelOptions& opts) {
    if (!(p.alpha > 1.0 && p.alpha <= 2.0))
        throw InvalidParameter("these kernels need 1 < alpha < 2, got alpha=" + std::to_string(p.alpha));
    return {kernel_f(p, t, opts), kernel_g(p, t, opts), kernel_U(p, t, opts)};
}

RootPair quadratic_roots(double a, double b) {
    const cplx sq = std::sqrt(cplx(a * a - 4.0 * b, 0.0));
    // the root without cancellation first, the other from the product b
    const cplx mu = 0.5 * (-a - sq);
    const cplx sigma = (mu != cplx(0.0)) ? cplx(b) / mu : 0.5 * (-a + sq);
    return {sigma, mu};
}

namespace {

struct TwoRootSetup {
    RootPair roots;
    cplx sq;
};

TwoRootSetup two_root_setup(double a, double b, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw InvalidParameter("two-root kernel needs 0 < alpha <= 1, got " + std::to_string(alpha));
    if (!(a >= 0.0)) throw InvalidParameter("two-root kernel needs a >= 0");
    const double disc = a * a - 4.0 * b;
    if (std::fabs(disc) < 1e-12 * std::max(a * a, std::fabs(4.0 * b)) || (a == 0.0 && b == 0.0)) {
        std::ostringstream os;
        os << "two-root kernel: a^2 - 4b = " << disc << " is numerically zero (a=" << a << ", b=" << b << ")";
        throw DegenerateRoots(os.str());
    }
    return {quadratic_roots(a, b), std::sqrt(cplx(disc, 0.0))};
}

TwoRootValue realize(cplx v) { return {v.real(), std::fabs(v.imag())}; }

// The difference of the two Mittag-Leffler terms is divided by sqrt(a^2 - 4b), so
// each term is evaluated tighter by that conditioning factor.
MLOptions two_root_options(const TwoRootSetup& s, double a, double tol) {
    MLOptions mo;
    const double scale = std::abs(s.roots.sigma) + std::abs(s.roots.mu) + a;
    mo.tol = tol * std::min(1.0, std::abs(s.sq) / scale);
    mo.wide_precision = false;
    return mo;
}

cplx two_root_ml(double alpha, double beta, cplx z, MLOptions mo) {
    try {
        return eval_prabhakar(1.0, alpha, beta, z, mo).value;
    } catch (const NonConvergence&) {
        mo.wide_precision = true;
        return eval_prabhakar(1.0, alpha, beta, z, mo).value;
    }
}

}  // namespace

TwoRootValue two_root_kernel_f(double a, double b, double alpha, double t, double tol) {
    if (t == 0.0) return {1.0, 0.0};
    check_time(t, "two-root kernel time");
    const TwoRootSetup s = two_root_setup(a, b, alpha);
    const MLOptions mo = two_root_options(s, a, tol);
    const double ta = std::pow(t, alpha);
    const cplx es = two_root_ml(alpha, 1.0, s.roots.sigma * ta, mo);
    const cplx em = two_root_ml(alpha, 1.0, s.roots.mu * ta, mo);
    return realize(((s.roots.sigma + a) * es - (s.roots.mu + a) * em) / s.sq);
}

TwoRootValue two_root_kernel_U(double a, double b, double alpha, double xi, double tol) {
    check_time(xi, "two-root kernel time");
    const TwoRootSetup s = two_root_setup(a, b, alpha);
    const MLOptions mo = two_root_options(s, a, tol);
    const double xa = std::pow(xi, alpha);
    const cplx es = two_root_ml(alpha, alpha, s.roots.sigma * xa, mo);
    const cplx em = two_root_ml(alpha, alpha, s.roots.mu * xa, mo);
    return realize(std::pow(xi, alpha - 1.0) * (es - em) / s.sq);
}

// ---------------------------------------------------------------------------

void SDParams::validate() const {
    auto bad = [](double e) { return !(e > 0.0); };
    for (const auto& u : upper)
        if (bad(u.first) || bad(u.second)) throw InvalidParameter("SD: upper pair exponents must be > 0");
    for (const auto& u : lower)
        if (bad(u.first) || bad(u.second)) throw InvalidParameter("SD: lower pair exponents must be > 0");
    for (const auto* v : {&upper_x, &upper_y, &lower_x, &lower_y})
        for (const auto& s : *v)
            if (bad(s.exponent)) throw InvalidParameter("SD: single-block exponents must be > 0");
}

SDConvergence sd_converges(const SDParams& p) {
    // subtract the numerator exponents from 1 first so that cancelling blocks leave no rounding
    double up_x = 0.0, up_y = 0.0, low_x = 0.0, low_y = 0.0;
    for (const auto& u : p.upper) {
        up_x += u.first;
        up_y += u.second;
    }
    for (const auto& b : p.upper_x) up_x += b.exponent;
    for (const auto& b : p.upper_y) up_y += b.exponent;
    for (const auto& l : p.lower) {
        low_x += l.first;
        low_y += l.second;
    }
    for (const auto& d : p.lower_x) low_x += d.exponent;
    for (const auto& d : p.lower_y) low_y += d.exponent;
    SDConvergence c;
    c.delta = (1.0 - up_x) + low_x;
    c.delta_prime = (1.0 - up_y) + low_y;
    c.converges = c.delta > 0.0 && c.delta_prime > 0.0;
    return c;
}

namespace {

// log|Gamma(v)| and its sign for a numerator factor.
bool log_gamma_signed(double v, double& log_abs, double& sign) {
    if (v <= 0.0 && v == std::nearbyint(v)) return false;
    log_abs = log_gamma(v);
    sign = (v > 0.0 || static_cast<long long>(std::floor(v)) % 2 == 0) ? 1.0 : -1.0;
    return true;
}

}  // namespace

SDValue sd_eval(const SDParams& p, cplx x, cplx y, const SDOptions& opts) {
    p.validate();
    const SDConvergence conv = sd_converges(p);

    const double ax = std::abs(x), ay = std::abs(y);
    const double lx = ax > 0.0 ? std::log(ax) : 0.0, ly = ay > 0.0 ? std::log(ay) : 0.0;
    const double phx = std::arg(x), phy = std::arg(y);

    // returns false when g_{m,n} is exactly zero
    auto term = [&](int m, int n, cplx& out) {
        double lg = 0.0, sg = 1.0, l, s;
        for (const auto& u : p.upper) {
            if (!log_gamma_signed(u.coef + m * u.first + n * u.second, l, s))
                throw InvalidParameter("SD: numerator Gamma argument hits a pole at (m,n)=(" + std::to_string(m) +
                                       "," + std::to_string(n) + ")");
            lg += l;
            sg *= s;
        }
        for (const auto& u : p.upper_x) {
            if (!log_gamma_signed(u.coef + m * u.exponent, l, s)) throw InvalidParameter("SD: numerator pole");
            lg += l;
            sg *= s;
        }
        for (const auto& u : p.upper_y) {
            if (!log_gamma_signed(u.coef + n * u.exponent, l, s)) throw InvalidParameter("SD: numerator pole");
            lg += l;
            sg *= s;
        }
        auto denom = [&](double v) {
            if (!log_gamma_signed(v, l, s)) return false;  // 1/Gamma at a pole is zero
            lg -= l;
            sg *= s;
            return true;
        };
        for (const auto& d : p.lower)
            if (!denom(d.coef + m * d.first + n * d.second)) return false;
        for (const auto& d : p.lower_x)
            if (!denom(d.coef + m * d.exponent)) return false;
        for (const auto& d : p.lower_y)
            if (!denom(d.coef + n * d.exponent)) return false;
        if ((m > 0 && ax == 0.0) || (n > 0 && ay == 0.0)) return false;
        const double logmag = lg + m * lx + n * ly - log_gamma(m + 1.0) - log_gamma(n + 1.0);
        out = sg * std::polar(std::exp(logmag), m * phx + n * phy);
        return true;
    };

    ComplexAccumulator acc;
    SDValue res;
    double prev_frontier = 0.0, frontier = 0.0, abs_sum = 0.0;
    int small_run = 0, growth_run = 0;
    for (int order = 0; order <= opts.max_order; ++order) {
        prev_frontier = frontier;
        frontier = 0.0;
        for (int m = 0; m <= order; ++m) {
            cplx v;
            if (!term(m, order - m, v)) continue;
            acc.add(v);
            frontier += std::abs(v);
        }
        abs_sum += frontier;
        res.order = order;
        if (!std::isfinite(frontier)) break;
        const double partial = std::abs(acc.value());
        const bool decreasing = order > 0 && frontier <= prev_frontier;
        if (decreasing && frontier <= opts.tol * partial)
            ++small_run;
        else if (frontier == 0.0 && order > 0)
            ++small_run;
        else
            small_run = 0;
        growth_run = (order > 0 && frontier > prev_frontier) ? growth_run + 1 : 0;
        if (small_run >= 3) {
            res.value = acc.value();
            const double q = prev_frontier > 0.0 ? frontier / prev_frontier : 0.0;
            res.error = (q < 1.0 ? frontier * q / (1.0 - q) : frontier) + 4.0 * DBL_EPSILON * abs_sum;
            return res;
        }
        if (!conv.converges && growth_run >= 20) break;
    }
    std::ostringstream os;
    os << "Srivastava-Daoust series at x=" << x << ", y=" << y << " (delta=" << conv.delta
       << ", delta_prime=" << conv.delta_prime << ")";
    if (!conv.converges) throw DivergentSeries(os.str() + " diverges: frontier sums keep growing");
    throw NonConvergence(os.str() + " did not converge within order " + std::to_string(opts.max_order));
}

SDParams sd_reference_instance(double a, double alpha, double beta) {
    SDParams p;
    p.upper.push_back({1.0, 1.0, 1.0});
    p.lower.push_back({a, alpha, beta});
    return p;
}

SDParams sd_kernel_instance(double alpha, double beta, double rho) {
    SDParams p;
    p.upper.push_back({1.0, 1.0, 1.0});
    p.lower.push_back({alpha - rho + 1.0, alpha - beta, alpha});
    return p;
}

std::vector<cplx> denominator_poles(double alpha, double beta, double a, cplx b) {
    std::vector<cplx> starts;
    const cplx I(0.0, 1.0);
    for (int m = -3; m <= 3; ++m) {
        const double turn = 2.0 * kPi * m;
        if (b != cplx(0.0)) starts.push_back((std::log(-b) + I * turn) / alpha);
        if (a > 0.0 && b != cplx(0.0)) starts.push_back((std::log(-b / a) + I * turn) / beta);
        if (a > 0.0 && alpha > beta) starts.push_back((std::log(a) + I * (turn + kPi)) / (alpha - beta));
    }
    std::vector<cplx> roots;
    for (cplx w : starts) {
        bool ok = false;
        for (int it = 0; it < 80; ++it) {
            const cplx ea = std::exp(alpha * w), eb = a > 0.0 ? a * std::exp(beta * w) : cplx(0.0);
            const cplx f = ea + eb + b;
            const cplx df = alpha * ea + beta * eb;
            if (std::abs(f) <= 1e-13 * (std::abs(ea) + std::abs(eb) + std::abs(b))) {
                ok = true;
                break;
            }
            if (df == cplx(0.0) || !std::isfinite(w.real())) break;
            cplx step = f / df;
            if (std::abs(step) > 2.0) step *= 2.0 / std::abs(step);
            w -= step;
        }
        if (!ok || std::fabs(w.imag()) >= kPi - 1e-9) continue;
        const cplx s = std::exp(w);
        bool seen = false;
        for (const cplx& r : roots) seen = seen || std::abs(r - s) <= 1e-8 * std::max(1.0, std::abs(s));
        if (!seen) roots.push_back(s);
    }
    return roots;
}

}  // namespace fracrd
