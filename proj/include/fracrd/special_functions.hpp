#pragma once

#include <complex>
#include <optional>

namespace fracrd {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Gamma function (Boost.Math with errors mapped to IEEE values).
/// Returns NaN at the poles and +-inf on overflow.
double gamma_fn(double x);

/// log|Gamma(x)|. Returns +inf at the poles (non-positive integers).
double log_gamma(double x);

/// 1/Gamma(x); exactly zero at non-positive integers, zero on underflow.
double reciprocal_gamma(double x);

/// sin(pi x) with argument reduction done before the multiplication by pi.
double sin_pi(double x);

enum class MLBackend { series, asymptotic };

const char* to_string(MLBackend backend);

/// Outcome of one Mittag-Leffler evaluation.
///
/// `tail_bound` is the total estimated absolute error: series truncation tail
/// plus propagated rounding for the series backend, first omitted term plus
/// Stokes-line ambiguity for the asymptotic backend.
struct MLResult {
    cplx value{};
    int terms_used = 0;
    double tail_bound = 0.0;
    MLBackend backend = MLBackend::series;
};

struct MLOptions {
    /// Accept when tail_bound <= tol * max(|value|, abs_scale). The default
    /// abs_scale of 1 makes `tol` an absolute tolerance for O(1) values.
    double tol = 1e-12;
    double abs_scale = 1.0;
    int max_terms = 2000;
    std::optional<MLBackend> force_backend;
    /// When false the series stops at long double; cancellation beyond that
    /// raises NonConvergence instead of moving to binary128 and 50 digits.
    bool wide_precision = true;
};

/// |z|^(1/beta) above which the asymptotic expansion is tried before the
/// series. It is kept only when its error estimate meets the tolerance.
inline constexpr double kAsymptoticTrial = 4.0;

/// Three-parameter (Prabhakar) Mittag-Leffler function
///   E^rho_{beta,gamma}(z) = sum_n (rho)_n z^n / (Gamma(n beta + gamma) n!).
///
/// The power series is summed with compensated accumulation, promoted to
/// long double and then binary128 when cancellation exceeds what the
/// narrower type can carry. For positive-integer rho and large |z| the
/// large-argument expansion (pole residues on the principal sheet plus the
/// algebraic series cut at its smallest term) is used instead.
///
/// Throws InvalidParameter when beta <= 0, gamma <= 0 or rho < 0, and
/// NonConvergence when no backend reaches the requested tolerance.
MLResult eval_prabhakar(double rho, double beta, double gamma, cplx z,
                        const MLOptions& opts = {});

/// Two-parameter (Wiman) Mittag-Leffler function E_{beta,gamma}(z).
MLResult eval_wiman(double beta, double gamma, cplx z, const MLOptions& opts = {});

/// Classical E_beta(z); shorthand returning the value only.
cplx mittag_leffler(double beta, cplx z, const MLOptions& opts = {});

}  // namespace fracrd
