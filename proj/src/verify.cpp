#include "gglab/verify.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gglab/parallel.hpp"
#include "gglab/rng.hpp"

namespace gglab {

Strategy Strategy::linear(Eigen::VectorXd t) {
  if (t.size() < 2) {
    throw std::invalid_argument("Strategy::linear: one threshold per agent required");
  }
  Strategy s;
  s.kind = Kind::LinearThreshold;
  s.thresholds = std::move(t);
  return s;
}

Strategy Strategy::policy(ThresholdFunction tf) {
  Strategy s;
  s.kind = Kind::ThresholdPolicy;
  s.tf = std::make_shared<ThresholdFunction>(std::move(tf));
  return s;
}

bool Strategy::risky(const ObservationVector& y, int agent,
                     const BeliefCoefficients& coeffs) const {
  if (kind == Kind::LinearThreshold) {
    if (agent < 0 || agent >= thresholds.size()) {
      throw std::invalid_argument("Strategy::risky: agent index out of range");
    }
    return posterior_theta(coeffs, y).mean <= thresholds(agent);
  }
  return eval_h(*tf, y, 0) >= 0.0;
}

namespace {

double strategy_h_value(const Strategy& strategy, const BeliefCoefficients& coeffs,
                        const ObservationVector& y, int agent) {
  if (strategy.kind == Strategy::Kind::LinearThreshold) {
    return strategy.thresholds(agent) - posterior_theta(coeffs, y).mean;
  }
  return eval_h(*strategy.tf, y, 0);
}

// Peer action on a sampled observation. For the functional policy the
// distinguished share is the one that came from us, matching the coordinate
// the sampling law singles out.
bool peer_plays_risky(const Strategy& strategy, const BeliefCoefficients& coeffs,
                      int peer_agent, double peer_own, double share_from_us,
                      const Eigen::VectorXd& other_shares) {
  if (strategy.kind == Strategy::Kind::LinearThreshold) {
    const double z = share_from_us + other_shares.sum();
    const double mean = coeffs.a_n * peer_own + coeffs.b_n * z;
    return mean <= strategy.thresholds(peer_agent);
  }
  Eigen::VectorXd reduced(1 + other_shares.size());
  reduced(0) = peer_own;
  reduced.tail(other_shares.size()) = other_shares;
  return share_from_us <= g_to_Ih(*strategy.tf, reduced);
}

}  // namespace

BestResponseReport best_response_gap(const Strategy& strategy,
                                     const BeliefCoefficients& coeffs,
                                     const ObservationVector& y_i,
                                     std::int64_t samples, std::uint64_t seed) {
  if (y_i.agents() != coeffs.n) {
    throw std::invalid_argument("best_response_gap: observation size does not match n");
  }
  if (samples < 10000) {
    throw std::invalid_argument("best_response_gap: at least 1e4 samples required");
  }
  const int peers = coeffs.n - 1;

  const Eigen::MatrixXd cov = peer_noise_covariance(coeffs);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("best_response_gap: degenerate peer noise covariance");
  }
  const Eigen::MatrixXd chol = llt.matrixL();
  const double relay_sd = std::sqrt(coeffs.tau2);

  BestResponseReport rep;
  rep.y_i = y_i;
  rep.rhs = posterior_theta(coeffs, y_i).mean;
  rep.peer_risky_prob.resize(peers);

  std::vector<double> probs(peers, 0.0);
  parallel_for_blocks(static_cast<std::size_t>(peers), [&](std::size_t begin,
                                                           std::size_t end) {
    Eigen::VectorXd z(peers), eps(peers), other_shares(peers - 1);
    for (std::size_t slot = begin; slot < end; ++slot) {
      const ConditionalPeerLaw law =
          peer_conditional_law(coeffs, y_i, static_cast<int>(slot));
      Rng rng = Rng::substream(seed, slot);
      std::int64_t hits = 0;
      for (std::int64_t s = 0; s < samples; ++s) {
        for (int a = 0; a < peers; ++a) z(a) = rng.normal();
        eps = chol * z;
        const double peer_own = law.mean_xk + eps(0);
        const double share_from_us = y_i.own + relay_sd * rng.normal();
        for (int a = 0; a < peers - 1; ++a) {
          other_shares(a) = law.mean_ylk(a) + eps(1 + a);
        }
        if (peer_plays_risky(strategy, coeffs, static_cast<int>(slot) + 1,
                             peer_own, share_from_us, other_shares)) {
          ++hits;
        }
      }
      probs[slot] = static_cast<double>(hits) / static_cast<double>(samples);
    }
  });

  double lhs = 1.0;
  double var = 0.0;
  for (int slot = 0; slot < peers; ++slot) {
    rep.peer_risky_prob(slot) = probs[slot];
    lhs += probs[slot];
    var += probs[slot] * (1.0 - probs[slot]) / static_cast<double>(samples);
  }
  rep.lhs = lhs;
  rep.mc_stderr = std::sqrt(var);
  rep.h_value = strategy_h_value(strategy, coeffs, y_i, 0);
  rep.prescribed_risky = strategy.risky(y_i, 0, coeffs);

  const bool best_response_risky = rep.lhs >= rep.rhs;
  rep.consistent = (rep.prescribed_risky == best_response_risky) ||
                   std::abs(rep.lhs - rep.rhs) <= 3.0 * rep.mc_stderr;
  return rep;
}

VerificationSummary verify_equilibrium(const ThresholdFunction& tf,
                                       int probe_count, std::int64_t samples,
                                       std::uint64_t seed) {
  if (probe_count < 2) {
    throw std::invalid_argument("verify_equilibrium: need at least two probes");
  }
  const BeliefCoefficients& coeffs = tf.coeffs;
  const GridSpec& spec = tf.g.spec();
  const int dim = spec.dim();
  const double tau = std::sqrt(coeffs.tau2);

  VerificationSummary summary;
  summary.seed = seed;
  summary.probes = probe_count;
  summary.reports.resize(probe_count);

  const Strategy strategy{Strategy::Kind::ThresholdPolicy, {},
                          std::make_shared<ThresholdFunction>(tf)};

  // Near-root probes concentrate on the transition band of g. Where g sits
  // against its bounds the peer probabilities saturate, the Monte-Carlo band
  // collapses to zero width, and the root carries no information; the
  // equality being verified is only resolvable where peers are genuinely
  // uncertain.
  std::vector<std::size_t> transition_nodes;
  {
    const double margin = 0.02 * (tf.g.hi() - tf.g.lo());
    for (Eigen::Index i = 0; i < tf.g.values().size(); ++i) {
      const double v = tf.g.values()(i);
      if (v >= tf.g.lo() + margin && v <= tf.g.hi() - margin) {
        transition_nodes.push_back(static_cast<std::size_t>(i));
      }
    }
    if (transition_nodes.empty()) {
      for (std::size_t i = 0; i < spec.node_count(); ++i) transition_nodes.push_back(i);
    }
  }

  for (int p = 0; p < probe_count; ++p) {
    Rng rng = Rng::substream(seed, 1000003ull + static_cast<std::uint64_t>(p));
    const bool near = (p % 2) == 0;
    Eigen::VectorXd reduced(dim);
    if (near) {
      const std::size_t pick = transition_nodes[static_cast<std::size_t>(
          rng.uniform01() * static_cast<double>(transition_nodes.size()))];
      spec.node_coords(pick, reduced.data());
      for (int a = 0; a < dim; ++a) {
        const double jitter = 0.5 * spec.spacing(a) * (2.0 * rng.uniform01() - 1.0);
        reduced(a) = std::clamp(reduced(a) + jitter, spec.lower(a), spec.upper(a));
      }
    } else {
      for (int a = 0; a < dim; ++a) {
        reduced(a) = rng.uniform(spec.lower(a), spec.upper(a));
      }
    }
    const double root = root_share(tf, reduced);
    double share = root;
    if (!near) {
      // stratified offsets away from the root, scaled by the relay noise
      const double magnitude = tau * (0.5 + 3.5 * rng.uniform01());
      share = root + (rng.uniform01() < 0.5 ? magnitude : -magnitude);
    }
    Eigen::VectorXd shares(dim);
    shares(0) = share;
    shares.tail(dim - 1) = reduced.tail(dim - 1);
    const ObservationVector probe(reduced(0), shares);

    ProbeRecord rec;
    rec.near_root = near;
    rec.report = best_response_gap(strategy, coeffs, probe, samples,
                                   seed + 7919ull * (p + 1));
    summary.reports[p] = std::move(rec);
  }

  int far_total = 0, far_consistent = 0;
  bool near_ok = true;
  for (const auto& rec : summary.reports) {
    const auto& r = rec.report;
    const bool band = std::abs(r.lhs - r.rhs) <= 3.0 * r.mc_stderr;
    const bool sign_agree = r.prescribed_risky == (r.lhs >= r.rhs);
    if (sign_agree) {
      ++summary.consistent;
    } else if (band) {
      ++summary.indeterminate;
    } else {
      ++summary.inconsistent;
    }
    const double violation = r.prescribed_risky ? r.rhs - r.lhs : r.lhs - r.rhs;
    summary.worst_gap = std::max(summary.worst_gap, violation);
    if (rec.near_root) {
      near_ok = near_ok && band;
    } else {
      ++far_total;
      if (r.consistent) ++far_consistent;
    }
  }
  summary.pass = near_ok && far_total > 0 &&
                 static_cast<double>(far_consistent) >= 0.99 * far_total;
  return summary;
}

WitnessResult nonexistence_witness(const GameParams& params,
                                   const Eigen::VectorXd& thresholds, double eps,
                                   double big_m, WitnessDirection direction,
                                   std::int64_t samples, std::uint64_t seed) {
  params.validate();
  if (thresholds.size() != params.n) {
    throw std::invalid_argument("nonexistence_witness: one threshold per agent required");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("nonexistence_witness: eps must be positive");
  }
  const BeliefCoefficients coeffs = compute_coefficients(params);
  const Eigen::MatrixXd V = build_V(coeffs);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  if (!lu.isInvertible()) {
    // cannot happen for tau > 0; guarded so a future regression fails loudly
    throw std::runtime_error("nonexistence_witness: belief map is singular");
  }

  const bool push_up = direction == WitnessDirection::PeersSafe;
  Eigen::VectorXd target(params.n);
  target(0) = push_up ? thresholds(0) - eps : thresholds(0) + eps;
  target.tail(params.n - 1).setConstant(push_up ? big_m : -big_m);

  const Eigen::VectorXd y = lu.solve(target);
  const ObservationVector witness(y(0), y.tail(params.n - 1));

  WitnessResult result;
  result.direction = direction;
  result.posterior_mean = posterior_theta(coeffs, witness).mean;
  result.peer_mean_target = push_up ? big_m : -big_m;
  result.y_i = witness;

  const double residual_var = peer_belief_residual_variance(coeffs);
  double worst_bound = 0.0;
  for (int j = 1; j < params.n; ++j) {
    const double distance = std::abs(result.peer_mean_target - thresholds(j));
    worst_bound = std::max(
        worst_bound, distance > 0.0 ? residual_var / (distance * distance) : 1.0);
  }
  result.chebyshev_bound = std::min(worst_bound, 1.0);

  result.report = best_response_gap(Strategy::linear(thresholds), coeffs, witness,
                                    samples, seed);
  result.mc_peer_risky = result.report.peer_risky_prob.maxCoeff();
  return result;
}

PlayoutResult simulate_playout(const GameParams& params, const Strategy& strategy,
                               double theta, std::uint64_t seed) {
  params.validate();
  const int n = params.n;
  Rng rng = Rng::substream(seed, 0);
  const double own_sd = std::sqrt(params.sigma2);
  const double relay_sd = std::sqrt(params.tau2);

  Eigen::VectorXd signals(n);
  for (int i = 0; i < n; ++i) signals(i) = theta + own_sd * rng.normal();

  // relay noise for every ordered pair (source j -> receiver i)
  Eigen::MatrixXd relay = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      relay(j, i) = relay_sd * rng.normal();
    }
  }

  const BeliefCoefficients coeffs = compute_coefficients(params);
  PlayoutResult result;
  result.theta = theta;
  result.actions.resize(n);
  result.payoffs.resize(n);
  result.observations.reserve(n);

  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd shares(n - 1);
    int idx = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      shares(idx++) = signals(j) + relay(j, i);
    }
    result.observations.emplace_back(signals(i), shares);
    result.actions[i] = strategy.risky(result.observations.back(), i, coeffs) ? 1 : 0;
  }

  const int risky_count =
      std::accumulate(result.actions.begin(), result.actions.end(), 0);
  for (int i = 0; i < n; ++i) {
    result.payoffs(i) = result.actions[i] * (risky_count - theta);
  }
  return result;
}

}  // namespace gglab
