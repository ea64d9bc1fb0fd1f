#include "fracrd/caputo.hpp"

#include <cmath>
#include <string>

#include "fracrd/errors.hpp"

namespace fracrd {

std::vector<double> l1_weights(double nu, std::size_t n) {
    std::vector<double> b(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double jj = static_cast<double>(j);
        b[j] = std::pow(jj + 1.0, 1.0 - nu) - std::pow(jj, 1.0 - nu);
    }
    return b;
}

namespace {

template <class T>
T l1_sum(const std::vector<T>& g, double nu, std::size_t n, double dt) {
    const std::vector<double> b = l1_weights(nu, n);
    T acc{};
    for (std::size_t j = 0; j < n; ++j) acc += b[j] * (g[n - j] - g[n - j - 1]);
    return acc * (std::pow(dt, -nu) * reciprocal_gamma(2.0 - nu));
}

template <class T>
T caputo_impl(const TimeSeries<T>& s, double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw InvalidParameter("Caputo order must lie in (0,2], got " + std::to_string(alpha));
    if (!(s.dt > 0.0)) throw InvalidParameter("time step must be > 0");
    if (s.values.size() < 3) throw InsufficientSamples("Caputo derivative needs at least 3 samples");
    if (n < 2) throw InsufficientSamples("Caputo derivative needs t_index >= 2");
    if (n >= s.values.size())
        throw InsufficientSamples("t_index " + std::to_string(n) + " is past the last sample");
    if (alpha > 1.0 && s.values.size() < 4)
        throw InsufficientSamples("Caputo derivative of order > 1 needs at least 4 samples");

    const std::vector<T>& f = s.values;
    const double dt = s.dt;

    if (alpha < 1.0) return l1_sum(f, alpha, n, dt);
    if (alpha == 1.0) return (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * dt);
    if (alpha == 2.0) {
        if (n >= 3) return (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / (dt * dt);
        return (f[n] - 2.0 * f[n - 1] + f[n - 2]) / (dt * dt);
    }

    // nodal slopes: given or one-sided at 0, trapezoid-consistent at 1, BDF2 afterwards
    std::vector<T> g(n + 1);
    g[0] = s.initial_slope ? *s.initial_slope : (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    g[1] = 2.0 * (f[1] - f[0]) / dt - g[0];
    for (std::size_t k = 2; k <= n; ++k) g[k] = (3.0 * f[k] - 4.0 * f[k - 1] + f[k - 2]) / (2.0 * dt);
    return l1_sum(g, alpha - 1.0, n, dt);
}

}  // namespace

double caputo_derivative(const TimeSeries<double>& series, double alpha, std::size_t t_index) {
    return caputo_impl(series, alpha, t_index);
}

cplx caputo_derivative(const TimeSeries<cplx>& series, double alpha, std::size_t t_index) {
    return caputo_impl(series, alpha, t_index);
}

}  // namespace fracrd
