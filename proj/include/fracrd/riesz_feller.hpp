#pragma once

#include <memory>
#include <vector>

#include "fracrd/special_functions.hpp"

namespace fracrd {

/// One space-fractional term lambda * D^gamma_theta.
struct SpaceOperator {
    double gamma = 2.0;
    double theta = 0.0;
    double lambda = 1.0;

    /// Throws InvalidParameter unless 0 < gamma <= 2, |theta| <= min(gamma, 2 - gamma), lambda > 0.
    void validate() const;
};

/// psi(k) = |k|^gamma exp(i sign(k) theta pi / 2), with psi(0) = 0. Lambda is not applied.
cplx feller_symbol(const SpaceOperator& op, double k);

/// Real samples on x0, x0 + dx, ..., assumed to vanish outside the grid.
struct UniformSamples {
    double x0 = 0.0;
    double dx = 1.0;
    std::vector<double> values;

    double x_max() const { return x0 + dx * static_cast<double>(values.size() - 1); }
};

struct RFQuadratureOptions {
    double tol = 1e-9;        // error budget relative to max(|result|, max|f|)
    double decay_tol = 1e-8;  // |f| at both grid ends must be below decay_tol * max|f|
};

struct RFQuadratureValue {
    double value = 0.0;
    double error = 0.0;
};

/// Real-space realization of D^gamma_theta (lambda not applied) through the
/// pair of one-sided hypersingular integrals
///   Gamma(1+g)/pi { sin((g+th)pi/2) int_0^inf [f(x+s)-f(x)] s^(-1-g) ds
///                 + sin((g-th)pi/2) int_0^inf [f(x-s)-f(x)] s^(-1-g) ds }.
/// The samples are interpolated by a quintic B-spline; for g > 1 the first
/// Taylor term is subtracted on (0,1) and restored as a finite part.
class RieszFellerQuadrature {
public:
    RieszFellerQuadrature(UniformSamples f, SpaceOperator op, RFQuadratureOptions opts = {});
    ~RieszFellerQuadrature();
    RieszFellerQuadrature(RieszFellerQuadrature&&) noexcept;
    RieszFellerQuadrature& operator=(RieszFellerQuadrature&&) noexcept;

    /// Throws OutOfRange when x is not strictly inside the grid, QuadratureFailure
    /// when the accumulated error estimate exceeds the budget.
    RFQuadratureValue operator()(double x) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around RieszFellerQuadrature.
RFQuadratureValue apply_quadrature(const UniformSamples& f, const SpaceOperator& op, double x,
                                   const RFQuadratureOptions& opts = {});

}  // namespace fracrd
