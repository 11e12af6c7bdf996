#pragma once

#include <Eigen/Core>

#include "gglab/belief.hpp"
#include "gglab/grid.hpp"
#include "gglab/observation.hpp"

namespace gglab {

// A candidate policy in functional form. The grid function g stores, per
// reduced observation (own signal plus all shares but one), the posterior
// mean an agent must hold to be exactly indifferent. The missing share is
// recovered through
//
//   g(reduced) = a_n * x + b_n * root + b_n * sum(other shares)
//
// so the indifference share is  root = (g - a_n x)/b_n - sum(other shares),
// and the policy value at a full observation is  h = root - observed share:
// play risky iff h >= 0. h is linear in the distinguished share with slope
// exactly -1.
struct ThresholdFunction {
  GridFunction g;
  BeliefCoefficients coeffs;
};

// reduced = (x, shares except the distinguished slot); size n-1
double g_to_Ih(const ThresholdFunction& tf,
               Eigen::Ref<const Eigen::VectorXd> reduced);

// h evaluated at a full observation, treating `slot` as the distinguished
// share coordinate.
double eval_h(const ThresholdFunction& tf, const ObservationVector& y, int slot);

// (x, shares without `slot`) in canonical order
Eigen::VectorXd reduced_observation(const ObservationVector& y, int slot);

// Root of h in the distinguished share, located by bisection on a bracket
// that is widened geometrically from an initial guess. Since h has slope -1
// in that coordinate the bracket always closes; tolerance is absolute.
double root_share(const ThresholdFunction& tf,
                  Eigen::Ref<const Eigen::VectorXd> reduced,
                  double tolerance = 1e-10);

}  // namespace gglab
