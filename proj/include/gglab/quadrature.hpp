#pragma once

#include <Eigen/Core>
#include <cmath>

namespace gglab {

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244008443621048);
}

// Gauss-Hermite rule rewritten for the standard normal weight: for a smooth f,
// E[f(Z)] with Z ~ N(0,1) is approximated by sum_i weights[i] * f(nodes[i]).
// Weights sum to one; an order-m rule is exact for polynomials up to degree
// 2m-1. Nodes are sorted ascending and the computation is deterministic.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussHermiteRule gauss_hermite_normal(int order);

}  // namespace gglab
