#include "fracrd/quadrature.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "fracrd/errors.hpp"
#include "fracrd/special_functions.hpp"

namespace fracrd {

QuadratureRule gauss_jacobi(int n, double a, double b) {
    if (n < 1) throw InvalidParameter("Gauss-Jacobi rule needs n >= 1");
    if (!(a > -1.0 && b > -1.0))
        throw InvalidParameter("Gauss-Jacobi exponents must exceed -1, got a=" + std::to_string(a) +
                               " b=" + std::to_string(b));
    const double ab = a + b;
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        diag(k) = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        const double num = 4.0 * k * (k + a) * (k + b) * (k + ab);
        const double den = s * s * (s + 1.0) * (s - 1.0);
        off(k - 1) = std::sqrt(num / den);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + log_gamma(a + 1.0) + log_gamma(b + 1.0) -
                                log_gamma(ab + 2.0));
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace fracrd
