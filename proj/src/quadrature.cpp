#include "weakval/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "weakval/errors.hpp"

namespace weakval {

GaussHermiteRule gauss_hermite(int n)
{
    if (n < 1) {
        throw InvalidArgument("Gauss-Hermite rule needs at least one node");
    }
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);

    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mu0 = std::sqrt(std::numbers::pi);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

const GaussHermiteRule& gauss_hermite_64()
{
    static const GaussHermiteRule rule = gauss_hermite(64);
    return rule;
}

}  // namespace weakval
