#pragma once

#include <Eigen/Core>
#include <span>

#include "gglab/game_params.hpp"
#include "gglab/linear_gaussian.hpp"
#include "gglab/observation.hpp"

namespace gglab {

struct GaussianEstimate {
  double mean = 0.0;
  double variance = 0.0;
};

// All closed-form constants of the Gaussian information structure. Everything
// here is a function of (n, sigma2, tau2) alone.
//
//   eta2_n, a_n, b_n   posterior of the fundamental given one observation:
//                      mean a_n*x_i + b_n*z_i, variance eta2_n, with
//                      1/eta2_n = 1/sigma2 + (n-1)/(sigma2+tau2) and
//                      a_n + (n-1) b_n = 1 exactly.
//   *_prev             same constants for a game with one agent fewer; they
//                      enter the peer-law means below.
//   gamma2_n, c_n, d_n a peer's signal seen through our observation:
//                      1/gamma2_n = 1/tau2 + 1/(eta2_prev + sigma2),
//                      c_n + d_n = 1.
//   e_n                max{c_n a_prev, d_n, c_n b_prev}; appears in the
//                      solver's sufficient conditions.
//   w_n                scale-free constant; the fixed-point iteration is a
//                      provable contraction whenever w_n < tau.
//   beta_n, diag_n, offdiag_n, V
//                      the linear map from an observation to the stacked
//                      belief vector (own posterior mean, expected posterior
//                      means of every peer). The matrix names diag_n/offdiag_n
//                      refer to the diagonal/off-diagonal entries of the lower
//                      block of V.
struct BeliefCoefficients {
  int n = 0;
  double sigma2 = 0.0, tau2 = 0.0;
  double eta2_n = 0.0, a_n = 0.0, b_n = 0.0;
  double eta2_prev = 0.0, a_prev = 0.0, b_prev = 0.0;
  double gamma2_n = 0.0, c_n = 0.0, d_n = 0.0;
  double e_n = 0.0;
  double w_n = 0.0;
  double beta_n = 0.0, diag_n = 0.0, offdiag_n = 0.0;
  Eigen::MatrixXd V;
};

// Precision-weighted fusion of independent noisy observations of one scalar
// under a flat prior. Throws std::invalid_argument on an empty list or a
// non-positive variance.
GaussianEstimate fuse_gaussian_observations(std::span<const GaussianEstimate> obs);

BeliefCoefficients compute_coefficients(const GameParams& params);

// Posterior of the fundamental given one agent's observation.
GaussianEstimate posterior_theta(const BeliefCoefficients& coeffs,
                                 const ObservationVector& y);

// The belief map V: row 0 is (a_n, b_n, ..., b_n); each remaining row has
// beta_n in column 0, diag_n on the diagonal and offdiag_n elsewhere.
Eigen::MatrixXd build_V(const BeliefCoefficients& coeffs);

// Conditional law of one peer's observation vector given ours. Slot 0 of
// cov_eps is the noise on the peer's own signal; the remaining slots follow
// the canonical order of the other peers. The share that travels from us to
// the peer is handled separately: it equals our own signal plus an
// independent N(0, tau2) noise, whose variance is var_eps_ik.
struct ConditionalPeerLaw {
  double mean_xk = 0.0;        // conditional mean of the peer's signal
  Eigen::VectorXd mean_ylk;    // conditional means of the shares the peer gets
                               // from everyone but us (canonical slot order)
  Eigen::MatrixXd cov_eps;     // (n-1) x (n-1) joint noise covariance
  double var_eps_ik = 0.0;     // tau2
};

ConditionalPeerLaw peer_conditional_law(const BeliefCoefficients& coeffs,
                                        const ObservationVector& y,
                                        int peer_slot);

// The (n-1)x(n-1) covariance block of ConditionalPeerLaw; it does not depend
// on the observation or the peer identity, so callers that only need the
// noise law can skip the mean computation.
Eigen::MatrixXd peer_noise_covariance(const BeliefCoefficients& coeffs);

// Full conditional (means and covariance) of a peer's components computed by
// the generic linear-Gaussian machinery. The closed-form means returned by
// peer_conditional_law must agree with this to rounding error.
ConditionalGaussian peer_conditional_full(const BeliefCoefficients& coeffs,
                                          const ObservationVector& y,
                                          int peer_slot);

// Var(a_n x_k + b_n z_k | y_i): residual variance of one peer's posterior
// mean given our observation. A constant of the parameters.
double peer_belief_residual_variance(const BeliefCoefficients& coeffs);

}  // namespace gglab
