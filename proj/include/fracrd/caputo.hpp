#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fracrd/special_functions.hpp"

namespace fracrd {

// Samples f(t0 + i*dt), i = 0..n-1. The optional initial slope f'(t0) is used
// by orders in (1,2); when absent it is estimated from the first three samples.
template <class T>
struct TimeSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<T> values;
    std::optional<T> initial_slope;
};

// Caputo derivative of order alpha in (0,2] at t0 + t_index*dt.
//   0 < alpha < 1 : L1 scheme, O(dt^(2-alpha))
//   alpha = 1     : second-order backward difference
//   1 < alpha < 2 : L1 of order alpha-1 applied to second-order nodal slopes
//   alpha = 2     : backward second difference (4-point when t_index >= 3)
// Throws InvalidParameter for alpha outside (0,2], InsufficientSamples when
// t_index < 2, t_index is past the end, or alpha > 1 with fewer than 4 samples.
double caputo_derivative(const TimeSeries<double>& series, double alpha, std::size_t t_index);
cplx caputo_derivative(const TimeSeries<cplx>& series, double alpha, std::size_t t_index);

// L1 weights b_j = (j+1)^(1-nu) - j^(1-nu), j = 0..n-1, for 0 < nu < 1.
std::vector<double> l1_weights(double nu, std::size_t n);

}  // namespace fracrd
