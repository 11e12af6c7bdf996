#include "gglab/belief.hpp"

#include <algorithm>
#include <stdexcept>

namespace gglab {

GaussianEstimate fuse_gaussian_observations(std::span<const GaussianEstimate> obs) {
  if (obs.empty()) {
    throw std::invalid_argument("fuse_gaussian_observations: empty observation list");
  }
  double precision = 0.0;
  double weighted = 0.0;
  for (const auto& o : obs) {
    if (!(o.variance > 0.0)) {
      throw std::invalid_argument("fuse_gaussian_observations: variances must be positive");
    }
    precision += 1.0 / o.variance;
    weighted += o.mean / o.variance;
  }
  GaussianEstimate out;
  out.variance = 1.0 / precision;
  out.mean = out.variance * weighted;
  return out;
}

BeliefCoefficients compute_coefficients(const GameParams& params) {
  params.validate();
  const int n = params.n;
  const double s2 = params.sigma2;
  const double st2 = params.sigma2 + params.tau2;

  BeliefCoefficients cf;
  cf.n = n;
  cf.sigma2 = params.sigma2;
  cf.tau2 = params.tau2;

  cf.eta2_n = 1.0 / (1.0 / s2 + (n - 1) / st2);
  cf.a_n = cf.eta2_n / s2;
  cf.b_n = cf.eta2_n / st2;

  cf.eta2_prev = 1.0 / (1.0 / s2 + (n - 2) / st2);
  cf.a_prev = cf.eta2_prev / s2;
  cf.b_prev = cf.eta2_prev / st2;

  cf.gamma2_n = 1.0 / (1.0 / params.tau2 + 1.0 / (cf.eta2_prev + s2));
  cf.c_n = cf.gamma2_n / (cf.eta2_prev + s2);
  cf.d_n = cf.gamma2_n / params.tau2;

  cf.e_n = std::max({cf.c_n * cf.a_prev, cf.d_n, cf.c_n * cf.b_prev});

  const double a = cf.a_n, b = cf.b_n, e = cf.e_n;
  const double scale = n * a + (n - 2) * b;
  const double contraction_scale = (n - 1) * (e * scale + b) / (b * b);
  const double lipschitz_scale = (n - 1) * (e * scale * (b + 2.0 * a) + b * b) / (a * b * b);
  cf.w_n = std::max(contraction_scale, lipschitz_scale);

  cf.beta_n = b + a * cf.c_n * cf.a_prev + (n - 2) * b * cf.c_n * cf.a_prev;
  cf.diag_n = a * cf.d_n + (n - 2) * b * cf.c_n * cf.b_prev;
  cf.offdiag_n = a * cf.c_n * cf.b_prev + b * cf.d_n + (n - 3) * b * cf.c_n * cf.b_prev;

  cf.V = build_V(cf);
  return cf;
}

GaussianEstimate posterior_theta(const BeliefCoefficients& coeffs,
                                 const ObservationVector& y) {
  if (y.agents() != coeffs.n) {
    throw std::invalid_argument("posterior_theta: observation size does not match n");
  }
  return {coeffs.a_n * y.own + coeffs.b_n * y.shared_sum, coeffs.eta2_n};
}

Eigen::MatrixXd build_V(const BeliefCoefficients& coeffs) {
  const int n = coeffs.n;
  Eigen::MatrixXd V(n, n);
  V.row(0).setConstant(coeffs.b_n);
  V(0, 0) = coeffs.a_n;
  for (int r = 1; r < n; ++r) {
    V.row(r).setConstant(coeffs.offdiag_n);
    V(r, 0) = coeffs.beta_n;
    V(r, r) = coeffs.diag_n;
  }
  return V;
}

namespace {

// Latent layout shared by the peer-law routines: our private noise, every
// peer's private noise, the relay noise on every share we received, and the
// relay noise on the shares the target peer receives from the other peers.
ImproperLocationModel peer_model(const BeliefCoefficients& coeffs, int peer_slot) {
  const int n = coeffs.n;
  const int peers = n - 1;
  if (peer_slot < 0 || peer_slot >= peers) {
    throw std::invalid_argument("peer law: peer slot out of range");
  }
  const int latents = 1 + peers + peers + (peers - 1);

  ImproperLocationModel m;
  m.latent_var.resize(latents);
  m.latent_var(0) = coeffs.sigma2;                                 // own noise
  m.latent_var.segment(1, peers).setConstant(coeffs.sigma2);       // peer noises
  m.latent_var.segment(1 + peers, peers).setConstant(coeffs.tau2); // relays to us
  m.latent_var.tail(peers - 1).setConstant(coeffs.tau2);           // relays to peer

  m.obs_loc = Eigen::VectorXd::Ones(n);
  m.obs_lat = Eigen::MatrixXd::Zero(n, latents);
  m.obs_lat(0, 0) = 1.0;  // our signal
  for (int q = 0; q < peers; ++q) {
    m.obs_lat(1 + q, 1 + q) = 1.0;          // peer q's noise
    m.obs_lat(1 + q, 1 + peers + q) = 1.0;  // relay noise toward us
  }

  m.tgt_loc = Eigen::VectorXd::Ones(peers);
  m.tgt_lat = Eigen::MatrixXd::Zero(peers, latents);
  m.tgt_lat(0, 1 + peer_slot) = 1.0;  // the peer's own signal
  int row = 1;
  int relay = 1 + 2 * peers;
  for (int q = 0; q < peers; ++q) {
    if (q == peer_slot) continue;
    m.tgt_lat(row, 1 + q) = 1.0;      // source peer's noise
    m.tgt_lat(row, relay++) = 1.0;    // relay noise toward the target peer
    ++row;
  }
  return m;
}

Eigen::VectorXd observed_vector(const ObservationVector& y) {
  Eigen::VectorXd obs(y.agents());
  obs(0) = y.own;
  obs.tail(y.shared.size()) = y.shared;
  return obs;
}

}  // namespace

ConditionalGaussian peer_conditional_full(const BeliefCoefficients& coeffs,
                                          const ObservationVector& y,
                                          int peer_slot) {
  if (y.agents() != coeffs.n) {
    throw std::invalid_argument("peer law: observation size does not match n");
  }
  return condition(peer_model(coeffs, peer_slot), observed_vector(y));
}

Eigen::MatrixXd peer_noise_covariance(const BeliefCoefficients& coeffs) {
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(coeffs.n - 1);
  ObservationVector y(0.0, zeros);
  return peer_conditional_full(coeffs, y, 0).cov;
}

ConditionalPeerLaw peer_conditional_law(const BeliefCoefficients& coeffs,
                                        const ObservationVector& y,
                                        int peer_slot) {
  if (y.agents() != coeffs.n) {
    throw std::invalid_argument("peer law: observation size does not match n");
  }
  const int peers = coeffs.n - 1;
  if (peer_slot < 0 || peer_slot >= peers) {
    throw std::invalid_argument("peer law: peer slot out of range");
  }

  const double base = coeffs.c_n * coeffs.a_prev * y.own;
  const auto mean_of = [&](int slot) {
    const double s = y.shared(slot);
    return base + coeffs.d_n * s + coeffs.c_n * coeffs.b_prev * (y.shared_sum - s);
  };

  ConditionalPeerLaw law;
  law.mean_xk = mean_of(peer_slot);
  law.mean_ylk.resize(peers - 1);
  int idx = 0;
  for (int q = 0; q < peers; ++q) {
    if (q == peer_slot) continue;
    law.mean_ylk(idx++) = mean_of(q);
  }
  law.cov_eps = peer_conditional_full(coeffs, y, peer_slot).cov;
  law.var_eps_ik = coeffs.tau2;
  return law;
}

double peer_belief_residual_variance(const BeliefCoefficients& coeffs) {
  // residual of a*x_k + b*z_k given our observation: a*eps_k + b*eps_ik +
  // b * sum of the remaining share noises
  const int peers = coeffs.n - 1;
  const Eigen::MatrixXd cov = peer_noise_covariance(coeffs);
  Eigen::VectorXd w(peers);
  w(0) = coeffs.a_n;
  w.tail(peers - 1).setConstant(coeffs.b_n);
  return w.dot(cov * w) + coeffs.b_n * coeffs.b_n * coeffs.tau2;
}

}  // namespace gglab
