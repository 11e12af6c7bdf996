#include "gglab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace gglab {

// Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal Jacobi
// matrix of the Hermite recurrence, weights come from the first component of
// the normalized eigenvectors. The physicists' rule (weight e^{-x^2}) is then
// rescaled to the N(0,1) measure: node -> sqrt(2)*node, weight -> weight/sqrt(pi),
// which leaves the squared first eigenvector components as the weights.
GaussHermiteRule gauss_hermite_normal(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite_normal: order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double off = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("gauss_hermite_normal: eigen decomposition failed");
  }
  GaussHermiteRule rule;
  rule.nodes = std::sqrt(2.0) * solver.eigenvalues();
  rule.weights = solver.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();  // exact normalization against rounding
  return rule;
}

}  // namespace gglab
