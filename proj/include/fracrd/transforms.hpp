#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fracrd/special_functions.hpp"

namespace fracrd {

/// Laplace-domain function s -> F(s), analytic on Re s > 0 (principal branches).
using LaplaceSymbol = std::function<cplx(cplx)>;

struct TalbotOptions {
    /// Contour scale mu*t used when no singularity forces a wider contour.
    double design_order = 24.0;
    /// Modulus bound on the singularities of F; the contour is widened to enclose them.
    double singularity_radius = 0.0;
    /// Failure threshold on the node-halving discrepancy, relative to max(|value|, abs_scale).
    double fail_rel = 1e-4;
    double abs_scale = 0.0;
    /// When positive, the node count is doubled (up to max_nodes) until error <= tol * max(|value|, abs_scale).
    double tol = 0.0;
    int max_nodes = 1024;
    /// Known poles of F. The contour scale is raised until each lies left of the contour
    /// with a margin of 0.2 |p| + 1/t.
    std::vector<cplx> poles;
};

struct TalbotResult {
    cplx value{};
    double error = 0.0;  ///< |r(2N) - r(N)| plus a rounding floor
    int nodes = 0;       ///< 2N, the node count of the returned value
};

/// Inverse Laplace transform at t by midpoint-trapezoid quadrature on the
/// Weideman cotangent contour s(th) = mu(-0.6122 + 0.5017 th cot(0.6407 th) + 0.2645 i th).
/// The sum is formed with `nodes` and with twice as many; the finer one is returned.
/// Throws InvalidParameter (t <= 0, nodes < 16) and ContourFailure.
TalbotResult talbot_invert(const LaplaceSymbol& F, double t, int nodes = 32, const TalbotOptions& opts = {});

/// Samples F(k_j) at k_j = (j - M) dk, j = 0..2M (symmetric about 0).
struct SpectralSamples {
    double dk = 0.0;
    std::vector<cplx> values;

    std::size_t half() const { return (values.size() - 1) / 2; }
    double k(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(half())) * dk; }
    double cutoff() const { return static_cast<double>(half()) * dk; }
};

struct FourierOptions {
    double decay_tol = 1e-8;  ///< |F(+-K)| must be below decay_tol * max|F|
};

struct FourierResult {
    std::vector<double> values;        ///< real part of the inverse transform
    std::vector<double> imag_residue;  ///< |imaginary part| per x
    bool aliasing_warning = false;     ///< dk * max|x| > pi/4
    std::string warning;
};

/// (1/2pi) int_{-K}^{K} F(k) exp(-ikx) dk by the trapezoid rule.
/// Throws InvalidParameter on a malformed grid and CutoffTooSmall when F has
/// not decayed at the cutoff.
FourierResult fourier_invert(const SpectralSamples& samples, const std::vector<double>& x_grid,
                             const FourierOptions& opts = {});

}  // namespace fracrd
