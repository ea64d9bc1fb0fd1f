#pragma once

#include <cstddef>

#include "fracrd/solution.hpp"

namespace fracrd {

// Periodic domain [-L, L) with n_x Fourier modes, uniform time step dt.
// n_t = 0 derives the step count from the last requested time.
struct FDGrid {
    double L = 50.0;
    std::size_t n_x = 1024;
    double dt = 1e-3;
    std::size_t n_t = 0;

    void validate() const;
};

struct FDOptions {
    double boundary_tol = 1e-6;  // |N(+-L)| must stay below boundary_tol * max|N|
    double growth_limit = 1e6;   // unforced runs fail when a mode exceeds this multiple of the initial maximum
};

// Time stepping of the scenario per Fourier mode: L1 weights for Caputo orders in (0,1],
// L1 on backward-difference slopes for orders in (1,2), the space operator as the exact
// symbol -b*(k), taken implicitly. Output is at the grid times nearest to sc.t_points
// (recorded in Field::t_points) on sc.x_grid by trigonometric interpolation.
// Throws StabilityFailure, BoundaryContamination, OutOfRange (x outside [-L, L]).
Field solve_fd(const Scenario& sc, const FDGrid& grid, const FDOptions& opts = {});

}  // namespace fracrd
