#include "fracrd/solution.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "fracrd/errors.hpp"
#include "fracrd/parallel.hpp"
#include "fracrd/quadrature.hpp"

namespace fracrd {

// ---------------------------------------------------------------------------
// Data types

void OrderParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw InvalidParameter("orders.alpha must lie in (0,2], got " + std::to_string(alpha));
    if (!(beta > 0.0 && beta <= alpha))
        throw InvalidParameter("orders.beta must satisfy 0 < beta <= alpha, got " + std::to_string(beta));
    if (!(a >= 0.0)) throw InvalidParameter("orders.a must be >= 0, got " + std::to_string(a));
    if (operators.empty()) throw InvalidParameter("orders.operators must contain at least one operator");
    for (std::size_t j = 0; j < operators.size(); ++j) {
        try {
            operators[j].validate();
        } catch (const InvalidParameter& e) {
            throw InvalidParameter("orders.operators[" + std::to_string(j) + "]: " + e.what());
        }
    }
}

cplx OrderParams::b_star(double k) const {
    cplx b = 0.0;
    for (const SpaceOperator& op : operators) b += op.lambda * feller_symbol(op, k);
    return b;
}

cplx Profile::transform(double k) const {
    switch (kind) {
        case Kind::zero:
            return 0.0;
        case Kind::delta:
            return amplitude * std::polar(1.0, k * center);
        case Kind::gaussian:
            return amplitude * width * std::sqrt(kPi) * std::exp(-0.25 * width * width * k * k) *
                   std::polar(1.0, k * center);
        case Kind::table: {
            cplx acc = 0.0;
            const std::size_t n = table.values.size();
            for (std::size_t j = 0; j < n; ++j) {
                const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
                acc += w * table.values[j] * std::polar(1.0, k * (table.x0 + table.dx * static_cast<double>(j)));
            }
            return acc * table.dx;
        }
    }
    return 0.0;
}

double Profile::value(double x) const {
    switch (kind) {
        case Kind::zero:
            return 0.0;
        case Kind::delta:
            throw InvalidParameter("the delta profile has no pointwise values");
        case Kind::gaussian: {
            const double u = (x - center) / width;
            return amplitude * std::exp(-u * u);
        }
        case Kind::table: {
            const double pos = (x - table.x0) / table.dx;
            if (pos < 0.0 || pos > static_cast<double>(table.values.size() - 1)) return 0.0;
            const std::size_t i = std::min(static_cast<std::size_t>(pos), table.values.size() - 2);
            const double w = pos - static_cast<double>(i);
            return (1.0 - w) * table.values[i] + w * table.values[i + 1];
        }
    }
    return 0.0;
}

void Profile::validate(const std::string& field) const {
    if (!std::isfinite(amplitude) || !std::isfinite(center))
        throw InvalidParameter(field + ": amplitude and center must be finite");
    if (kind == Kind::gaussian && !(width > 0.0))
        throw InvalidParameter(field + ".width must be > 0, got " + std::to_string(width));
    if (kind == Kind::table) {
        if (table.values.size() < 2) throw InvalidParameter(field + ": table needs at least 2 samples");
        if (!(table.dx > 0.0)) throw InvalidParameter(field + ": table spacing must be > 0");
    }
}

void SourceSpec::validate() const {
    if (kind == Kind::separable) {
        space.validate("source.space");
        if (!std::isfinite(time_value) || !std::isfinite(time_rate))
            throw InvalidParameter("source: time profile parameters must be finite");
    }
    if (kind == Kind::table) {
        if (table_rows.size() < 2) throw InvalidParameter("source.table needs at least 2 time rows");
        if (!(table_dt > 0.0)) throw InvalidParameter("source.table time spacing must be > 0");
        for (const auto& row : table_rows)
            if (row.values.size() < 2 || !(row.dx > 0.0))
                throw InvalidParameter("source.table rows need >= 2 samples and positive spacing");
    }
}

cplx source_transform(const SourceSpec& U, double k, double t) {
    switch (U.kind) {
        case SourceSpec::Kind::zero:
            return 0.0;
        case SourceSpec::Kind::separable: {
            const double u2 = U.time_kind == SourceSpec::TimeKind::constant ? U.time_value
                                                                             : U.time_value * std::exp(U.time_rate * t);
            return U.space.transform(k) * u2;
        }
        case SourceSpec::Kind::table: {
            const double pos = (t - U.table_t0) / U.table_dt;
            const double last = static_cast<double>(U.table_rows.size() - 1);
            if (pos < -1e-12 || pos > last + 1e-12) {
                std::ostringstream os;
                os << "source table covers t in [" << U.table_t0 << ", " << U.table_t0 + last * U.table_dt
                   << "], requested t=" << t;
                throw OutOfRange(os.str());
            }
            const double p = std::clamp(pos, 0.0, last);
            const std::size_t i = std::min(static_cast<std::size_t>(p), U.table_rows.size() - 2);
            const double w = p - static_cast<double>(i);
            Profile row0{Profile::Kind::table, 1.0, 0.0, 1.0, U.table_rows[i]};
            Profile row1{Profile::Kind::table, 1.0, 0.0, 1.0, U.table_rows[i + 1]};
            return (1.0 - w) * row0.transform(k) + w * row1.transform(k);
        }
    }
    return 0.0;
}

void Scenario::validate() const {
    orders.validate();
    const bool second_order = orders.alpha > 1.0;
    f.validate("initial.f");
    if (second_order && !g)
        throw InvalidParameter("initial.g is required when alpha > 1 (alpha=" + std::to_string(orders.alpha) + ")");
    if (!second_order && g && g->kind != Profile::Kind::zero)
        throw InvalidParameter("initial.g must be absent when alpha <= 1");
    if (g) g->validate("initial.g");
    U.validate();
    if (t_points.empty()) throw InvalidParameter("grids.t_points must not be empty");
    for (std::size_t i = 0; i < t_points.size(); ++i) {
        if (!(t_points[i] > 0.0)) throw InvalidParameter("grids.t_points must be > 0");
        if (i > 0 && !(t_points[i] > t_points[i - 1])) throw InvalidParameter("grids.t_points must be increasing");
    }
    if (x_grid.empty()) throw InvalidParameter("grids.x must not be empty");
    for (std::size_t i = 1; i < x_grid.size(); ++i)
        if (!(x_grid[i] > x_grid[i - 1])) throw InvalidParameter("grids.x must be increasing");
    if (spectral.K < 0.0 || spectral.dk < 0.0) throw InvalidParameter("grids.K and grids.dk must be >= 0");
}

bool Scenario::real_data() const { return true; }

// ---------------------------------------------------------------------------
// Per-sample evaluation

namespace {

const QuadratureRule& cached_rule(int n, double b) {
    static std::mutex mtx;
    static std::map<std::pair<int, double>, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, b);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, gauss_jacobi(n, 0.0, b)).first;
    return it->second;
}

enum class KernelKind { f, g, U_reduced, U_integrated, U_exponential };

struct Evaluated {
    cplx value;
    double error = 0.0;
    int terms = 0;
    int asym = 0;
    bool fallback = false;
};

// `rate` is the exponent r of a source time factor e^(r t); only U_exponential reads it.
cplx laplace_numerator(KernelKind kind, const KernelParams& p, cplx s, double rate) {
    switch (kind) {
        case KernelKind::f:
            return std::pow(s, p.alpha - 1.0) + (p.a != 0.0 ? p.a * std::pow(s, p.beta - 1.0) : cplx(0.0));
        case KernelKind::g:
            return std::pow(s, p.alpha - 2.0) +
                   (p.a != 0.0 && p.beta > 1.0 ? p.a * std::pow(s, p.beta - 2.0) : cplx(0.0));
        case KernelKind::U_reduced:
            return 1.0;
        case KernelKind::U_integrated:
            return 1.0 / s;
        case KernelKind::U_exponential:
            return 1.0 / (s - rate);
    }
    return 1.0;
}

Evaluated talbot_kernel(KernelKind kind, const KernelParams& p, double t, const Tolerances& tol,
                        double rate = 0.0) {
    LaplaceSymbol F = [&](cplx s) {
        return laplace_numerator(kind, p, s, rate) / (std::pow(s, p.alpha) + p.a * std::pow(s, p.beta) + p.b);
    };
    TalbotOptions o;
    o.poles = denominator_poles(p.alpha, p.beta, p.a, p.b);
    if (kind == KernelKind::U_exponential && rate != 0.0) o.poles.push_back(rate);
    o.tol = tol.kernel;
    o.abs_scale = 1e-12;
    o.max_nodes = 512;
    const TalbotResult r = talbot_invert(F, t, 32, o);
    Evaluated e;
    e.value = r.value;
    e.error = r.error;
    e.terms = r.nodes;
    e.fallback = true;
    if (kind == KernelKind::U_reduced) {
        const double s = std::pow(t, 1.0 - p.alpha);
        e.value *= s;
        e.error *= s;
    }
    return e;
}

Evaluated series_kernel(KernelKind kind, const KernelParams& p, double t, const Tolerances& tol, bool wide) {
    KernelOptions ko;
    ko.tol = tol.kernel;
    ko.wide_precision = wide;
    KernelValue v;
    switch (kind) {
        case KernelKind::f:
            v = kernel_f(p, t, ko);
            break;
        case KernelKind::g:
            v = kernel_g(p, t, ko);
            break;
        case KernelKind::U_reduced:
            v = kernel_U_reduced(p, t, ko);
            break;
        case KernelKind::U_integrated: {
            KernelParams q = p;
            q.rho = 0.0;
            v = kernel_T(q, t, ko);
            break;
        }
        case KernelKind::U_exponential:
            throw InvalidParameter("the exponential source kernel has no series form");
    }
    return {v.value, v.error, v.terms, v.asymptotic_calls, false};
}

Evaluated eval_kernel(KernelKind kind, const KernelParams& p, double t, const Scenario& sc) {
    if (sc.backend == KernelBackend::talbot) return talbot_kernel(kind, p, t, sc.tol);
    // Series needing binary128 or wider cost far more than a contour integral, so
    // those cases go to Talbot; the wide series remains the last resort.
    try {
        return series_kernel(kind, p, t, sc.tol, false);
    } catch (const NonConvergence&) {
    }
    try {
        return talbot_kernel(kind, p, t, sc.tol);
    } catch (const NumericalError&) {
        return series_kernel(kind, p, t, sc.tol, true);
    }
}

void absorb(SpectralValue& out, const Evaluated& e) {
    out.talbot_fallback = out.talbot_fallback || e.fallback;
    out.kernel_terms = std::max(out.kernel_terms, e.terms);
    out.asymptotic_calls += e.asym;
    out.kernel_error = std::max(out.kernel_error, e.error);
}

// int_0^t U*(k, t - xi) xi^(nu-1) R(xi) dxi. R carries powers xi^((alpha-beta) r), so
// [0,t] is cut geometrically towards the origin: Gauss-Jacobi on the innermost piece,
// Gauss-Legendre elsewhere. Per-piece node counts double until the total settles.
template <class ReducedKernel>
cplx convolve(const SourceSpec& U, double k, double t, double nu, double tol, ReducedKernel&& R, SpectralValue& out) {
    constexpr double kRatio = 0.25;
    constexpr int kPieces = 14;
    std::vector<double> cuts{t};
    for (int j = 1; j <= kPieces; ++j) cuts.push_back(t * std::pow(kRatio, j));
    auto integrand = [&](double xi) { return source_transform(U, k, t - xi) * R(xi); };

    cplx prev = 0.0, cur = 0.0;
    out.convolution_settled = false;
    for (int n = 8; n <= 128; n *= 2) {
        const QuadratureRule& legendre = cached_rule(n, 0.0);
        const QuadratureRule& jacobi = cached_rule(n, nu - 1.0);
        cplx acc = 0.0;
        for (int j = 0; j < kPieces; ++j) {
            const double hi = cuts[j], lo = cuts[j + 1];
            const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            cplx piece = 0.0;
            for (int i = 0; i < n; ++i) {
                const double xi = mid + half * legendre.nodes[i];
                piece += legendre.weights[i] * std::pow(xi, nu - 1.0) * integrand(xi);
            }
            acc += half * piece;
        }
        const double eps = cuts.back();
        cplx inner = 0.0;
        for (int i = 0; i < n; ++i) inner += jacobi.weights[i] * integrand(0.5 * eps * (1.0 + jacobi.nodes[i]));
        acc += std::pow(0.5 * eps, nu) * inner;
        cur = acc;
        out.convolution_nodes = n * (kPieces + 1);
        if (n > 8 && std::abs(cur - prev) <= tol * std::max(std::abs(cur), 1e-12)) {
            out.convolution_settled = true;
            break;
        }
        prev = cur;
    }
    return cur;
}

std::string sample_tag(double k, double t) {
    std::ostringstream os;
    os << "(k=" << k << ", t=" << t << ")";
    return os.str();
}

// Source value * exp(r t): the convolution is the inverse transform of 1 / ((s - r) D(s)).
// Returns false when the contour fails, leaving the quadrature route to the caller.
bool exponential_source(const Scenario& sc, double k, double t, const KernelParams& p, SpectralValue& out) {
    const cplx u = source_transform(sc.U, k, 0.0);
    if (u == cplx(0.0)) return true;
    try {
        Evaluated e = talbot_kernel(KernelKind::U_exponential, p, t, sc.tol, sc.U.time_rate);
        e.fallback = false;
        absorb(out, e);
        out.value += u * e.value;
        return true;
    } catch (const NumericalError&) {
        return false;
    }
}

SpectralValue spectral_sample(const Scenario& sc, double k, double t) {
    SpectralValue out;
    KernelParams p{sc.orders.alpha, sc.orders.beta, sc.orders.a, sc.orders.b_star(k), 1.0};
    try {
        const cplx fstar = sc.f.transform(k);
        if (fstar != cplx(0.0)) {
            const Evaluated e = eval_kernel(KernelKind::f, p, t, sc);
            absorb(out, e);
            out.value += fstar * e.value;
        }
        if (sc.orders.alpha > 1.0 && sc.g) {
            const cplx gstar = sc.g->transform(k);
            if (gstar != cplx(0.0)) {
                const Evaluated e = eval_kernel(KernelKind::g, p, t, sc);
                absorb(out, e);
                out.value += gstar * e.value;
            }
        }
        if (sc.U.kind == SourceSpec::Kind::separable && sc.U.time_kind == SourceSpec::TimeKind::constant) {
            // constant-in-time source: the convolution is the kernel of s^-1 / D
            const cplx u = source_transform(sc.U, k, t);
            if (u != cplx(0.0)) {
                const Evaluated e = eval_kernel(KernelKind::U_integrated, p, t, sc);
                absorb(out, e);
                out.value += u * e.value;
            }
        } else if (sc.U.kind == SourceSpec::Kind::separable && sc.U.time_kind == SourceSpec::TimeKind::exponential &&
                   exponential_source(sc, k, t, p, out)) {
            // handled in closed form
        } else if (sc.U.kind != SourceSpec::Kind::zero) {
            const cplx conv = convolve(
                sc.U, k, t, p.alpha, sc.tol.convolution,
                [&](double xi) {
                    const Evaluated e = eval_kernel(KernelKind::U_reduced, p, xi, sc);
                    absorb(out, e);
                    return e.value;
                },
                out);
            out.value += conv;
        }
    } catch (const NumericalError& e) {
        throw NonConvergence(std::string("spectral sample ") + sample_tag(k, t) + ": " + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid assembly shared by solve_field and telegraph_solution

using SampleFn = std::function<SpectralValue(double k, double t)>;

// Wavenumber beyond which a profile transform is below tol relative to its peak; +inf if it never is.
double profile_band(const Profile& p, double tol) {
    if (p.kind == Profile::Kind::zero) return 0.0;
    if (p.kind == Profile::Kind::gaussian) return 2.0 / p.width * std::sqrt(std::log(1.0 / tol));
    return std::numeric_limits<double>::infinity();
}

double default_cutoff(const Scenario& sc) {
    const double tmin = sc.t_points.front();
    double K = 0.0;
    for (const auto& op : sc.orders.operators) K = std::max(K, 40.0 * std::pow(op.lambda * tmin, -1.0 / op.gamma));
    // band-limited data: the kernels are bounded, so the data band caps the cutoff
    const double tol = 0.1 * sc.tol.cutoff_decay;
    double band = profile_band(sc.f, tol);
    if (sc.g) band = std::max(band, profile_band(*sc.g, tol));
    if (sc.U.kind == SourceSpec::Kind::separable) band = std::max(band, profile_band(sc.U.space, tol));
    if (sc.U.kind == SourceSpec::Kind::table) band = std::numeric_limits<double>::infinity();
    return std::min(K, band);
}

double profile_extent(const Profile& p) {
    switch (p.kind) {
        case Profile::Kind::zero:
            return 0.0;
        case Profile::Kind::delta:
            return std::fabs(p.center);
        case Profile::Kind::gaussian:
            return std::fabs(p.center) + 5.0 * p.width;
        case Profile::Kind::table:
            return std::max(std::fabs(p.table.x0), std::fabs(p.table.x_max()));
    }
    return 0.0;
}

// The inversion is periodic with period 2 pi / dk = 8 R. R covers the output points
// and the solution out to where its tail falls below tol.refine of the peak: the data
// extent plus a multiple of the spreading length l = (lambda t^alpha)^(1/gamma) at the
// last output time. Tails decay like |x|^(-1-gamma) for gamma < 2, so an image at
// distance 8R contributes about (l / 8R)^(1+gamma) relative to the peak.
double default_spacing(const Scenario& sc) {
    double reach = 0.0;
    for (double x : sc.x_grid) reach = std::max(reach, std::fabs(x));
    double extent = profile_extent(sc.f);
    if (sc.g) extent = std::max(extent, profile_extent(*sc.g));
    if (sc.U.kind == SourceSpec::Kind::separable) extent = std::max(extent, profile_extent(sc.U.space));
    if (sc.U.kind == SourceSpec::Kind::table)
        for (const auto& row : sc.U.table_rows)
            extent = std::max({extent, std::fabs(row.x0), std::fabs(row.x_max())});
    const double tmax = sc.t_points.back();
    double spread = 0.0;
    for (const auto& op : sc.orders.operators)
        spread = std::max(spread, std::pow(op.lambda * std::pow(tmax, sc.orders.alpha), 1.0 / op.gamma) *
                                      std::max(10.0, 0.25 * std::pow(sc.tol.refine, -1.0 / (1.0 + op.gamma))));
    reach = std::max(reach, extent + spread);
    return reach > 0.0 ? kPi / (4.0 * reach) : 0.1;
}

struct Grid {
    double dk;
    std::size_t M;  // samples at j = -M..M
    // [t][j + M]
    std::vector<std::vector<cplx>> values;
    std::vector<SpectralValue> diag;  // per (t, j), only for the evaluated ones
    std::vector<std::string> fallback_tags;
};

void fill(Grid& G, const Scenario& sc, const SampleFn& fn, std::size_t old_M, bool fresh) {
    const std::size_t nt = sc.t_points.size();
    const std::size_t M = G.M;
    const bool sym = sc.spectral.exploit_symmetry && sc.real_data();
    std::vector<std::vector<cplx>> next(nt, std::vector<cplx>(2 * M + 1));
    if (!fresh)
        for (std::size_t it = 0; it < nt; ++it)
            for (std::size_t j = 0; j <= 2 * old_M; ++j) next[it][j + (M - old_M)] = G.values[it][j];
    G.values.swap(next);

    // indices to evaluate: offsets from the centre
    std::vector<long> todo;
    const long lo = fresh ? 0 : static_cast<long>(old_M) + 1;
    for (long j = lo; j <= static_cast<long>(M); ++j) {
        todo.push_back(j);
        if (!sym && j != 0) todo.push_back(-j);
    }
    std::vector<SpectralValue> results(todo.size() * nt);
    parallel_for(todo.size(), [&](std::size_t idx) {
        const double k = static_cast<double>(todo[idx]) * G.dk;
        for (std::size_t it = 0; it < nt; ++it) results[idx * nt + it] = fn(k, sc.t_points[it]);
    });
    for (std::size_t idx = 0; idx < todo.size(); ++idx) {
        const long j = todo[idx];
        for (std::size_t it = 0; it < nt; ++it) {
            const SpectralValue& v = results[idx * nt + it];
            G.values[it][static_cast<std::size_t>(static_cast<long>(M) + j)] = v.value;
            if (sym && j != 0) G.values[it][static_cast<std::size_t>(static_cast<long>(M) - j)] = std::conj(v.value);
            G.diag.push_back(v);
            if (v.talbot_fallback && G.fallback_tags.size() < 8)
                G.fallback_tags.push_back(sample_tag(static_cast<double>(j) * G.dk, sc.t_points[it]));
        }
    }
}

Field invert(const Scenario& sc, Grid& G, const SampleFn& fn, FieldDiagnostics& diag, bool auto_cutoff) {
    FourierOptions fo;
    fo.decay_tol = sc.tol.cutoff_decay;
    for (;;) {
        Field field;
        field.t_points = sc.t_points;
        field.x_grid = sc.x_grid;
        bool cutoff_failed = false;
        std::string failure;
        for (std::size_t it = 0; it < sc.t_points.size(); ++it) {
            SpectralSamples S{G.dk, G.values[it]};
            try {
                FourierResult r = fourier_invert(S, sc.x_grid, fo);
                if (r.aliasing_warning && it == 0) diag.warnings.push_back(r.warning);
                field.values.push_back(std::move(r.values));
                field.imag_residue.push_back(std::move(r.imag_residue));
            } catch (const CutoffTooSmall& e) {
                cutoff_failed = true;
                failure = std::string(e.what()) + " at t=" + std::to_string(sc.t_points[it]);
                break;
            }
        }
        if (!cutoff_failed) {
            diag.K = static_cast<double>(G.M) * G.dk;
            diag.dk = G.dk;
            diag.k_samples = 2 * G.M + 1;
            return field;
        }
        if (!auto_cutoff || diag.cutoff_doublings >= sc.tol.max_cutoff_doublings) throw CutoffTooSmall(failure);
        ++diag.cutoff_doublings;
        const std::size_t old = G.M;
        G.M *= 2;
        fill(G, sc, fn, old, false);
    }
}

void summarize(Field& field, const Grid& G) {
    FieldDiagnostics& d = field.diagnostics;
    d.fallback_samples = G.fallback_tags;
    for (const SpectralValue& v : G.diag) {
        ++d.kernel_evaluations;
        if (v.talbot_fallback) ++d.talbot_fallbacks;
        if (!v.convolution_settled) ++d.unsettled_convolutions;
        d.asymptotic_calls += static_cast<std::size_t>(v.asymptotic_calls);
        d.max_kernel_terms = std::max(d.max_kernel_terms, v.kernel_terms);
        d.max_kernel_error = std::max(d.max_kernel_error, v.kernel_error);
    }
    field.max_abs = 0.0;
    field.max_imag_residue = 0.0;
    for (std::size_t it = 0; it < field.values.size(); ++it)
        for (std::size_t i = 0; i < field.values[it].size(); ++i) {
            field.max_abs = std::max(field.max_abs, std::fabs(field.values[it][i]));
            field.max_imag_residue = std::max(field.max_imag_residue, field.imag_residue[it][i]);
        }
}

Field run_pipeline(const Scenario& sc, const SampleFn& fn) {
    const bool auto_K = !(sc.spectral.K > 0.0);
    double K = auto_K ? default_cutoff(sc) : sc.spectral.K;
    double dk = sc.spectral.dk > 0.0 ? sc.spectral.dk : default_spacing(sc);

    auto attempt = [&](double Kc, double dkc, FieldDiagnostics& diag) {
        Grid G;
        G.dk = dkc;
        G.M = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(Kc / dkc)));
        fill(G, sc, fn, 0, true);
        Field field = invert(sc, G, fn, diag, auto_K);
        field.diagnostics = diag;
        summarize(field, G);
        return field;
    };

    FieldDiagnostics diag;
    Field field = attempt(K, dk, diag);
    if (!sc.spectral.refine) return field;

    for (int round = 1; round <= 4; ++round) {
        K = field.diagnostics.K * 2.0;
        dk *= 0.5;
        FieldDiagnostics d2;
        d2.warnings = field.diagnostics.warnings;
        Field finer = attempt(K, dk, d2);
        double change = 0.0;
        for (std::size_t it = 0; it < finer.values.size(); ++it)
            for (std::size_t i = 0; i < finer.values[it].size(); ++i)
                change = std::max(change, std::fabs(finer.values[it][i] - field.values[it][i]));
        finer.diagnostics.refinement_rounds = round;
        finer.diagnostics.refinement_change = change;
        field = std::move(finer);
        if (change <= sc.tol.refine * std::max(field.max_abs, 1e-300)) break;
        if (round == 4) field.diagnostics.warnings.push_back("refinement did not settle within 4 rounds");
    }
    return field;
}

void record_fallbacks(Field& field, const Scenario& sc) {
    const FieldDiagnostics& d = field.diagnostics;
    if (d.talbot_fallbacks > 0 && sc.backend == KernelBackend::series)
        field.diagnostics.warnings.push_back(std::to_string(d.talbot_fallbacks) +
                                             " (k,t) samples used the Talbot fallback");
    if (d.unsettled_convolutions > 0)
        field.diagnostics.warnings.push_back(std::to_string(d.unsettled_convolutions) +
                                             " source convolutions did not settle at 128 nodes per piece");
}

}  // namespace

SpectralValue spectral_solution(const Scenario& sc, double k, double t) {
    sc.orders.validate();
    if (!(t > 0.0)) throw InvalidParameter("spectral_solution needs t > 0");
    if (sc.orders.alpha > 1.0 && !sc.g) throw InvalidParameter("initial.g is required when alpha > 1");
    return spectral_sample(sc, k, t);
}

Field solve_field(const Scenario& sc) {
    sc.validate();
    Field field = run_pipeline(sc, [&](double k, double t) { return spectral_sample(sc, k, t); });
    record_fallbacks(field, sc);
    return field;
}

// ---------------------------------------------------------------------------
// Two-root path

namespace {

void check_telegraph(const Scenario& sc) {
    const OrderParams& o = sc.orders;
    if (o.operators.size() != 1 || o.operators[0].gamma != 2.0 || o.operators[0].theta != 0.0)
        throw InvalidParameter("telegraph path needs exactly one operator with gamma=2, theta=0");
    const double nu = o.beta;
    if (std::fabs(o.alpha - 2.0 * nu) > 1e-12 * o.alpha)
        throw InvalidParameter("telegraph path needs orders (2 nu, nu); got alpha=" + std::to_string(o.alpha) +
                               ", beta=" + std::to_string(o.beta));
    if (!(nu > 0.0 && nu <= 1.0)) throw InvalidParameter("telegraph path needs 0 < nu <= 1");
    if (sc.g && sc.g->kind != Profile::Kind::zero)
        throw InvalidParameter("initial.g must be zero on the telegraph path");
}

SpectralValue telegraph_sample(const Scenario& sc, double k, double t) {
    const double nu = sc.orders.beta;
    const double lambda = sc.orders.operators[0].lambda;
    const double a = sc.orders.a;
    const double tol = 0.1 * sc.tol.kernel;
    SpectralValue out;
    // degenerate roots: average two nearby nodes (the kernel is smooth in b)
    auto with_roots = [&](auto&& body) {
        try {
            return body(lambda * k * k);
        } catch (const DegenerateRoots&) {
            const double eps = 1e-5 * std::max(std::fabs(k), 1e-3);
            return 0.5 * (body(lambda * (k + eps) * (k + eps)) + body(lambda * (k - eps) * (k - eps)));
        }
    };
    const cplx fstar = sc.f.transform(k);
    if (fstar != cplx(0.0))
        out.value += fstar * with_roots([&](double b) { return two_root_kernel_f(a, b, nu, t, tol).value; });
    if (sc.U.kind != SourceSpec::Kind::zero) {
        out.value += convolve(
            sc.U, k, t, nu, sc.tol.convolution,
            [&](double xi) {
                return with_roots(
                    [&](double b) { return two_root_kernel_U(a, b, nu, xi, tol).value * std::pow(xi, 1.0 - nu); });
            },
            out);
    }
    return out;
}

}  // namespace

SpectralValue telegraph_spectral(const Scenario& sc, double k, double t) {
    sc.orders.validate();
    check_telegraph(sc);
    if (!(t > 0.0)) throw InvalidParameter("telegraph_spectral needs t > 0");
    return telegraph_sample(sc, k, t);
}

Field telegraph_solution(const Scenario& sc) {
    sc.validate();
    check_telegraph(sc);
    Field field = run_pipeline(sc, [&](double k, double t) { return telegraph_sample(sc, k, t); });
    record_fallbacks(field, sc);
    return field;
}

}  // namespace fracrd
