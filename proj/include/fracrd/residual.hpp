#pragma once

#include <vector>

#include "fracrd/solution.hpp"

namespace fracrd {

struct ResidualOptions {
    double dt = 0.01;          // Caputo step; fields are computed at t = dt, 2dt, ..., T
    double half_width = 30.0;  // samples on [-half_width, half_width] feed the space quadrature
    double dx = 0.02;
    double quadrature_tol = 1e-8;
};

struct ResidualReport {
    double T = 0.0;
    std::vector<double> x;
    std::vector<double> residual;  // D^a N + a D^b N - sum lambda_j D_j N - U at (x, T)
    double max_residual = 0.0;
    double max_abs = 0.0;  // max |N(x, T)| over the evaluation points
};

// Feeds solve_field output back through caputo_derivative and the space quadrature.
// The initial profile must have pointwise values (not a delta); x_eval points are
// snapped to the sample grid.
ResidualReport pde_residual(const Scenario& sc, double T, const std::vector<double>& x_eval,
                            const ResidualOptions& opts = {});

}  // namespace fracrd
