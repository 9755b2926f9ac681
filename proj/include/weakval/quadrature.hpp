#pragma once

#include <vector>

namespace weakval {

/// Gauss-Hermite rule for integrals of the form  int f(t) e^{-t^2} dt.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule from the Golub-Welsch eigenproblem of the Hermite Jacobi matrix.
GaussHermiteRule gauss_hermite(int n);

/// Cached 64-point rule.
const GaussHermiteRule& gauss_hermite_64();

}  // namespace weakval
