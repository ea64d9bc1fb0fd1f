#pragma once

#include <vector>

#include "fracrd/special_functions.hpp"

namespace fracrd {

// Parameters of the Laplace-domain kernel s^(rho-1) / (s^alpha + a s^beta + b).
struct KernelParams {
    double alpha = 1.0;
    double beta = 0.5;
    double a = 0.0;
    cplx b = 0.0;
    double rho = 1.0;

    // Throws InvalidParameter unless alpha > 0, 0 < beta <= alpha, a >= 0 and
    // alpha - rho > -1.
    void validate() const;
};

struct KernelOptions {
    double tol = 1e-10;    // relative error target
    double floor = 1e-14;  // absolute floor under which values count as zero
    int max_terms = 500;   // r-series budget
    bool wide_precision = true;  // passed to the Mittag-Leffler evaluations
};

struct KernelValue {
    cplx value{};
    double error = 0.0;      // truncation plus per-term Mittag-Leffler errors
    int terms = 0;           // r-series terms used (1 for collapsed forms)
    int asymptotic_calls = 0;
    int ml_terms_max = 0;
};

// L^{-1}{ s^(rho-1) / (s^alpha + a s^beta + b) }(t) through the series
//   t^(alpha-rho) sum_r (-a)^r t^((alpha-beta) r) E^{r+1}_{alpha, alpha+(alpha-beta)r-rho+1}(-b t^alpha).
// alpha == beta collapses to t^(alpha-rho)/(1+a) E_{alpha, alpha-rho+1}(-b t^alpha / (1+a)).
// Throws NonConvergence when the estimated error exceeds tol * max(|value|, floor).
KernelValue kernel_T(const KernelParams& p, double t, const KernelOptions& opts = {});

// Zeros of s^alpha + a s^beta + b on the principal sheet |arg s| < pi (Newton in log s
// from the dominant-balance branches). Used to place Talbot contours.
std::vector<cplx> denominator_poles(double alpha, double beta, double a, cplx b);

// The same series without the t^(alpha-rho) prefactor.
KernelValue kernel_T_reduced(const KernelParams& p, double t, const KernelOptions& opts = {});

// Initial-value kernel K_f = L^{-1}{(s^(alpha-1) + a s^(beta-1)) / D}. Requires alpha <= 2.
KernelValue kernel_f(const KernelParams& p, double t, const KernelOptions& opts = {});

// Kernel of the initial velocity, L^{-1}{(s^(alpha-2) + a [beta>1] s^(beta-2)) / D}.
// Requires 1 < alpha <= 2; the beta term is present only when the beta
// derivative is itself of order above one.
KernelValue kernel_g(const KernelParams& p, double t, const KernelOptions& opts = {});

// Source kernel K_U(xi) = L^{-1}{1/D}(xi) = xi^(alpha-1) * kernel_U_reduced(xi).
KernelValue kernel_U(const KernelParams& p, double xi, const KernelOptions& opts = {});
KernelValue kernel_U_reduced(const KernelParams& p, double xi, const KernelOptions& opts = {});

struct SubdiffusionKernels {
    KernelValue K_f;
    KernelValue K_U;
};

struct DiffusionWaveKernels {
    KernelValue K_f;
    KernelValue K_g;
    KernelValue K_U;
};

// Kernels for 0 < alpha <= 1; K_U is evaluated at xi = t.
SubdiffusionKernels subdiffusion_time_kernels(const KernelParams& p, double t, const KernelOptions& opts = {});

// Kernels for 1 < alpha < 2 (alpha = 2 accepted as the wave limit); K_U at xi = t.
// Throws InvalidParameter when alpha <= 1.
DiffusionWaveKernels diffusion_wave_time_kernels(const KernelParams& p, double t, const KernelOptions& opts = {});

// Roots of y^2 + a y + b.
struct RootPair {
    cplx sigma;
    cplx mu;
};

RootPair quadratic_roots(double a, double b);

struct TwoRootValue {
    double value = 0.0;
    double imag_residue = 0.0;  // |imaginary part| discarded
};

// Telegraph-type kernels for orders (2 alpha, alpha), 0 < alpha <= 1:
//   K_f = [(sigma+a) E_alpha(sigma t^alpha) - (mu+a) E_alpha(mu t^alpha)] / sqrt(a^2-4b)
//   K_U = xi^(alpha-1) [E_{alpha,alpha}(sigma xi^alpha) - E_{alpha,alpha}(mu xi^alpha)] / sqrt(a^2-4b)
// Throws DegenerateRoots when |a^2-4b| < 1e-12 max(a^2, |4b|).
TwoRootValue two_root_kernel_f(double a, double b, double alpha, double t, double tol = 1e-10);
TwoRootValue two_root_kernel_U(double a, double b, double alpha, double xi, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Srivastava-Daoust double series
//   S(x,y) = sum_{m,n} g_{m,n} x^m y^n / (m! n!),
//   g_{m,n} = prod G(a_j + m th_j + n Ph_j) prod G(b_j + m Ps_j) prod G(b'_j + n Ps'_j)
//           / [prod G(c_j + m de_j + n ep_j) prod G(d_j + m et_j) prod G(d'_j + n et'_j)].

struct SDPairTerm {
    double coef = 0.0;
    double first = 1.0;   // multiplies m
    double second = 1.0;  // multiplies n
};

struct SDSingleTerm {
    double coef = 0.0;
    double exponent = 1.0;
};

struct SDParams {
    std::vector<SDPairTerm> upper;          // (a; theta, Phi)
    std::vector<SDSingleTerm> upper_x;      // (b; Psi)
    std::vector<SDSingleTerm> upper_y;      // (b'; Psi')
    std::vector<SDPairTerm> lower;          // (c; delta, epsilon)
    std::vector<SDSingleTerm> lower_x;      // (d; eta)
    std::vector<SDSingleTerm> lower_y;      // (d'; eta')

    // Throws InvalidParameter if any exponent is not positive.
    void validate() const;
};

struct SDConvergence {
    bool converges = false;
    double delta = 0.0;
    double delta_prime = 0.0;
};

SDConvergence sd_converges(const SDParams& p);

struct SDOptions {
    double tol = 1e-14;
    int max_order = 2000;  // largest m+n
};

struct SDValue {
    cplx value{};
    int order = 0;  // last frontier m+n summed
    double error = 0.0;
};

SDValue sd_eval(const SDParams& p, cplx x, cplx y, const SDOptions& opts = {});

// Instance equal to Gamma(a)^(-1) sum (1)_{m+n} x^m y^n / (m! n! (a)_{alpha m + beta n}).
SDParams sd_reference_instance(double a, double alpha, double beta);

// Instance whose value at (-a t^(alpha-beta), -b t^alpha), times t^(alpha-rho), is kernel_T.
SDParams sd_kernel_instance(double alpha, double beta, double rho);

}  // namespace fracrd
