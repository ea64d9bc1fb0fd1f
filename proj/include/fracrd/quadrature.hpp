#pragma once

#include <vector>

namespace fracrd {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Jacobi rule on [-1,1] for the weight (1-x)^a (1+x)^b, a,b > -1,
// from the eigen-decomposition of the Jacobi matrix (Golub-Welsch).
QuadratureRule gauss_jacobi(int n, double a, double b);

}  // namespace fracrd
