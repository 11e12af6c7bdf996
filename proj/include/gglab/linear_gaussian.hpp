#pragma once

#include <Eigen/Core>

namespace gglab {

// Exact conditioning in a linear-Gaussian model whose variables all load on a
// common location scalar carrying a flat (improper uniform) prior.
//
// Every variable is written as   coeff * L + c' w,   where L is the shared
// location scalar and w ~ N(0, diag(latent_var)) are independent proper
// latents. As long as the observed block identifies L (some row loads on it),
// the conditional law of the targets has a well-defined flat-prior limit:
//
//   L | Y        ~ N(m_L, v_L)            (precision-weighted GLS estimate)
//   U | Y        ~ N(G y + v m_L,  C1 + v_L v v')
//
// with G the usual gain of the location-free model, v = u_loc - G y_loc, and
// C1 the location-free conditional covariance. The location itself is never
// sampled unconditionally.
struct ImproperLocationModel {
  Eigen::VectorXd latent_var;  // diagonal covariance of w
  Eigen::VectorXd obs_loc;     // location loadings of the observed block
  Eigen::MatrixXd obs_lat;     // latent loadings, one row per observation
  Eigen::VectorXd tgt_loc;     // location loadings of the target block
  Eigen::MatrixXd tgt_lat;     // latent loadings, one row per target
};

struct ConditionalGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double location_mean = 0.0;
  double location_var = 0.0;
};

ConditionalGaussian condition(const ImproperLocationModel& model,
                              const Eigen::VectorXd& observed);

}  // namespace gglab
