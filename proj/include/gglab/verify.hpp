#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "gglab/belief.hpp"
#include "gglab/engine.hpp"
#include "gglab/game_params.hpp"
#include "gglab/observation.hpp"
#include "gglab/threshold.hpp"

namespace gglab {

// A candidate policy profile. The linear kind compares each agent's posterior
// mean against a per-agent threshold (risky when the mean is at or below it);
// the functional kind plays risky when the shared threshold function is
// non-negative, evaluating h with slot 0 as the distinguished share. Ties sit
// on the risky side in both cases.
struct Strategy {
  enum class Kind { LinearThreshold, ThresholdPolicy };
  Kind kind = Kind::LinearThreshold;
  Eigen::VectorXd thresholds;                   // linear: one entry per agent
  std::shared_ptr<const ThresholdFunction> tf;  // functional: shared h

  static Strategy linear(Eigen::VectorXd t);
  static Strategy policy(ThresholdFunction tf);

  bool risky(const ObservationVector& y, int agent,
             const BeliefCoefficients& coeffs) const;
};

// One best-response probe. lhs is 1 plus the Monte-Carlo estimate of how many
// peers play risky given our observation; rhs is the exact posterior mean.
// The probe is consistent when the prescribed action matches the sign of
// lhs - rhs, or when the gap is inside the three-standard-error band that
// Monte Carlo cannot resolve.
struct BestResponseReport {
  ObservationVector y_i;
  double lhs = 0.0;
  double rhs = 0.0;
  double mc_stderr = 0.0;
  double h_value = 0.0;
  bool prescribed_risky = false;
  bool consistent = false;
  Eigen::VectorXd peer_risky_prob;  // one entry per peer
};

BestResponseReport best_response_gap(const Strategy& strategy,
                                     const BeliefCoefficients& coeffs,
                                     const ObservationVector& y_i,
                                     std::int64_t samples, std::uint64_t seed);

struct ProbeRecord {
  BestResponseReport report;
  bool near_root = false;
};

// pass = at least 99% of the far probes are consistent and every near-root
// probe sits inside the indeterminate band.
struct VerificationSummary {
  int probes = 0;
  int consistent = 0;
  int indeterminate = 0;
  int inconsistent = 0;
  double worst_gap = 0.0;  // largest wrong-direction margin over all probes
  std::uint64_t seed = 0;
  bool pass = false;
  std::vector<ProbeRecord> reports;
};

VerificationSummary verify_equilibrium(const ThresholdFunction& tf,
                                       int probe_count, std::int64_t samples,
                                       std::uint64_t seed);

// The two directions of the constructive argument against belief-threshold
// policies: drive every peer's expected belief to +M (their risky probability
// collapses, so the prescribed risky action at t_i - eps cannot be a best
// response) or to -M (the mirrored contradiction at t_i + eps).
enum class WitnessDirection { PeersSafe, PeersRisky };

struct WitnessResult {
  ObservationVector y_i;
  BestResponseReport report;
  double posterior_mean = 0.0;   // t_i -/+ eps by construction
  double peer_mean_target = 0.0; // +M or -M
  double chebyshev_bound = 0.0;  // analytic tail bound for the pushed peers
  double mc_peer_risky = 0.0;    // largest sampled peer-risky probability
  WitnessDirection direction = WitnessDirection::PeersSafe;
};

WitnessResult nonexistence_witness(const GameParams& params,
                                   const Eigen::VectorXd& thresholds, double eps,
                                   double big_m,
                                   WitnessDirection direction = WitnessDirection::PeersSafe,
                                   std::int64_t samples = 100000,
                                   std::uint64_t seed = 1);

struct PlayoutResult {
  double theta = 0.0;
  std::vector<int> actions;
  Eigen::VectorXd payoffs;
  std::vector<ObservationVector> observations;
};

// Forward simulation of one round: draw every private and relay noise, build
// each agent's observation, apply the strategy, and settle payoffs
// (risky pays the head count of risky agents minus theta; safe pays zero).
PlayoutResult simulate_playout(const GameParams& params, const Strategy& strategy,
                               double theta, std::uint64_t seed);

}  // namespace gglab
