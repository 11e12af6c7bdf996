#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gglab/belief.hpp"
#include "gglab/game_params.hpp"
#include "gglab/grid.hpp"
#include "gglab/threshold.hpp"

namespace gglab {

// Numerical backend for the expectation over the peer noise block: either a
// tensor Gauss-Hermite rule mapped through the Cholesky factor of the noise
// covariance, or seeded Monte Carlo with one deterministic substream per
// (node, peer) pair so parallel and serial runs agree bit for bit.
struct IntegrationScheme {
  enum class Kind { GaussHermite, MonteCarlo };
  Kind kind = Kind::GaussHermite;
  int gh_nodes = 32;
  std::int64_t mc_samples = 100000;
  std::uint64_t seed = 1;

  static IntegrationScheme gauss_hermite(int nodes) {
    IntegrationScheme s;
    s.kind = Kind::GaussHermite;
    s.gh_nodes = nodes;
    return s;
  }
  static IntegrationScheme monte_carlo(std::int64_t samples, std::uint64_t seed) {
    IntegrationScheme s;
    s.kind = Kind::MonteCarlo;
    s.mc_samples = samples;
    s.seed = seed;
    return s;
  }
  void validate(int integral_dim) const;
};

// How the parameters sit relative to the solver's sufficient conditions.
//   lipschitz_bound_lhs   must be <= tau for the iteration to provably keep
//                         the Lipschitz class invariant
//   contraction_factor    provable sup-norm contraction rate (< 1 required)
//   w_n < tau             both at once; fixed-point existence and uniqueness
// For two agents the Lipschitz condition collapses to a scalar expression in
// a = a_2 alone, reported as n2_reformulated_lhs (compare against tau).
struct ConditionReport {
  double lipschitz_bound_lhs = 0.0;
  double contraction_factor = 0.0;
  double w_n = 0.0;
  double tau = 0.0;
  bool lipschitz_ok = false;
  bool contraction_ok = false;
  bool banach_ok = false;
  std::optional<double> n2_reformulated_lhs;
};

struct SolveDiagnostics {
  int iterations = 0;
  std::vector<double> sup_deltas;  // sup-norm step sizes, one per iteration
  bool converged = false;
  ConditionReport condition;
  double wall_time_seconds = 0.0;
  double final_lipschitz_ratio = 0.0;
  bool banach_warning = false;  // set when iterating outside the proven regime
  double integration_error_estimate = 0.0;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
  SolveDiagnostics diagnostics;
  explicit DivergenceError(SolveDiagnostics diag)
      : std::runtime_error("fixed-point iteration is diverging"),
        diagnostics(std::move(diag)) {}
};

ConditionReport check_conditions(const GameParams& params);

// Integrand of the update: with the distinguished share recovered from g, the
// peer in `peer_slot` is believed to see (mean + eps); M is the standardized
// margin by which our share to that peer clears the peer's indifference
// level,
//   M = ( g(mean+eps) - a_n*(own component) - b_n*sum(share components)
//         - b_n * x ) / (b_n * tau).
double eval_M(const GridFunction& g, const BeliefCoefficients& coeffs,
              Eigen::Ref<const Eigen::VectorXd> y, int peer_slot,
              Eigen::Ref<const Eigen::VectorXd> eps);

// One sweep of the update operator over every node: value = 1 + sum over
// peers of E[Phi(M)], the expectation taken under the joint peer-noise law.
// The result is clamped to [1, n] and re-symmetrized over the share axes.
GridFunction apply_T(const GridFunction& g, const BeliefCoefficients& coeffs,
                     const IntegrationScheme& scheme);

// Default box: every axis covers the band where the posterior mean can cross
// [1, n], padded by five noise standard deviations. Default resolution drops
// with dimension; more than four axes are refused.
GridSpec default_grid(const GameParams& params, const BeliefCoefficients& coeffs);

struct SolveOptions {
  IntegrationScheme scheme;
  std::optional<GridSpec> grid;
  std::optional<GridFunction> initial;  // default: constant (n+1)/2
  double tol = 1e-6;
  int max_iter = 200;
  std::function<void(int, const GridFunction&)> on_iterate;  // optional hook
};

struct SolveResult {
  ThresholdFunction threshold;
  SolveDiagnostics diagnostics;
};

// Successive application of the operator until the sup-norm step falls under
// tol or max_iter is hit. When the sufficient condition fails the solve still
// proceeds (the condition is sufficient, not necessary) but flags the
// diagnostics and aborts with DivergenceError after ten consecutive
// increasing steps.
SolveResult solve(const GameParams& params, const SolveOptions& options = {});

}  // namespace gglab
