#include "gglab/engine.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "gglab/parallel.hpp"
#include "gglab/quadrature.hpp"
#include "gglab/rng.hpp"

namespace gglab {

void IntegrationScheme::validate(int integral_dim) const {
  if (integral_dim < 1) {
    throw std::invalid_argument("IntegrationScheme: integral dimension must be positive");
  }
  if (kind == Kind::GaussHermite) {
    if (gh_nodes < 1) throw std::invalid_argument("IntegrationScheme: gh_nodes must be positive");
    if (integral_dim > 4) {
      throw std::invalid_argument(
          "IntegrationScheme: tensor Gauss-Hermite is limited to four dimensions");
    }
  } else {
    if (mc_samples < 10000) {
      throw std::invalid_argument("IntegrationScheme: Monte Carlo needs at least 1e4 samples");
    }
  }
}

ConditionReport check_conditions(const GameParams& params) {
  const BeliefCoefficients cf = compute_coefficients(params);
  const int n = cf.n;
  const double a = cf.a_n, b = cf.b_n, e = cf.e_n;
  const double tau = std::sqrt(cf.tau2);
  const double scale = n * a + (n - 2) * b;

  ConditionReport rep;
  rep.tau = tau;
  rep.lipschitz_bound_lhs = (n - 1) * (e * scale * (b + 2.0 * a) + b * b) / (a * b * b);
  rep.contraction_factor = (n - 1) * (e * scale + b) / (b * b * tau);
  rep.w_n = cf.w_n;
  rep.lipschitz_ok = rep.lipschitz_bound_lhs <= tau;
  rep.contraction_ok = rep.contraction_factor < 1.0;
  rep.banach_ok = cf.w_n < tau;
  if (n == 2) {
    rep.n2_reformulated_lhs = (4.0 * a * a + 3.0 * a - 1.0) / (a * (1.0 - a));
  }
  return rep;
}

namespace {

// Per-node geometry shared by the integration backends: the recovered share,
// the conditional mean of every peer's signal, and the stacked mean vector of
// the components peer `l` sees (its own signal first, then the shares it gets
// from the other peers, ascending slot order).
struct NodeContext {
  double x = 0.0;
  Eigen::VectorXd xbar;  // one entry per peer
};

NodeContext node_context(const BeliefCoefficients& cf,
                         Eigen::Ref<const Eigen::VectorXd> y, double g_value) {
  const int peers = cf.n - 1;
  NodeContext ctx;
  ctx.x = y(0);
  const double others = y.tail(peers - 1).sum();
  const double recovered = g_value / cf.b_n - (cf.a_n / cf.b_n) * ctx.x - others;
  const double z = recovered + others;
  const double base = cf.c_n * cf.a_prev * ctx.x;
  ctx.xbar.resize(peers);
  for (int m = 0; m < peers; ++m) {
    const double share = (m == 0) ? recovered : y(m);
    ctx.xbar(m) = base + cf.d_n * share + cf.c_n * cf.b_prev * (z - share);
  }
  return ctx;
}

void peer_mean(const NodeContext& ctx, int peer_slot, Eigen::VectorXd& mu) {
  const int peers = static_cast<int>(ctx.xbar.size());
  mu(0) = ctx.xbar(peer_slot);
  int idx = 1;
  for (int m = 0; m < peers; ++m) {
    if (m == peer_slot) continue;
    mu(idx++) = ctx.xbar(m);
  }
}

double big_m(const GridFunction& g, const BeliefCoefficients& cf, double x,
             const Eigen::VectorXd& arg) {
  const double own = arg(0);
  const double shares = arg.sum() - own;
  return (g.eval(arg) - cf.a_n * own - cf.b_n * shares - cf.b_n * x) /
         (cf.b_n * std::sqrt(cf.tau2));
}

}  // namespace

double eval_M(const GridFunction& g, const BeliefCoefficients& coeffs,
              Eigen::Ref<const Eigen::VectorXd> y, int peer_slot,
              Eigen::Ref<const Eigen::VectorXd> eps) {
  const int peers = coeffs.n - 1;
  if (y.size() != peers || eps.size() != peers) {
    throw std::invalid_argument("eval_M: dimension mismatch");
  }
  if (peer_slot < 0 || peer_slot >= peers) {
    throw std::invalid_argument("eval_M: peer slot out of range");
  }
  const NodeContext ctx = node_context(coeffs, y, g.eval(y));
  Eigen::VectorXd mu(peers);
  peer_mean(ctx, peer_slot, mu);
  return big_m(g, coeffs, ctx.x, Eigen::VectorXd(mu + eps));
}

GridFunction apply_T(const GridFunction& g, const BeliefCoefficients& coeffs,
                     const IntegrationScheme& scheme) {
  const GridSpec& spec = g.spec();
  const int dim = spec.dim();
  const int peers = coeffs.n - 1;
  if (dim != peers) {
    throw std::invalid_argument("apply_T: grid dimension does not match the game");
  }
  scheme.validate(dim);
  if (g.values().minCoeff() < 1.0 - 1e-9 ||
      g.values().maxCoeff() > coeffs.n + 1e-9) {
    throw std::invalid_argument("apply_T: input values leave [1, n]");
  }

  const Eigen::MatrixXd cov = peer_noise_covariance(coeffs);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("apply_T: peer noise covariance is not positive definite");
  }
  const Eigen::MatrixXd chol = llt.matrixL();

  // Gauss-Hermite: the mapped noise points are node-independent, build once.
  Eigen::MatrixXd gh_eps;
  Eigen::VectorXd gh_w;
  if (scheme.kind == IntegrationScheme::Kind::GaussHermite) {
    const GaussHermiteRule rule = gauss_hermite_normal(scheme.gh_nodes);
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(scheme.gh_nodes);
    gh_eps.resize(dim, static_cast<Eigen::Index>(total));
    gh_w.resize(static_cast<Eigen::Index>(total));
    Eigen::VectorXd z(dim);
    for (std::size_t q = 0; q < total; ++q) {
      std::size_t rest = q;
      double w = 1.0;
      for (int a = dim - 1; a >= 0; --a) {
        const int digit = static_cast<int>(rest % scheme.gh_nodes);
        rest /= scheme.gh_nodes;
        z(a) = rule.nodes(digit);
        w *= rule.weights(digit);
      }
      gh_eps.col(static_cast<Eigen::Index>(q)) = chol * z;
      gh_w(static_cast<Eigen::Index>(q)) = w;
    }
  }

  const std::size_t nodes = spec.node_count();
  Eigen::VectorXd out(static_cast<Eigen::Index>(nodes));

  parallel_for_blocks(nodes, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd coord(dim), mu(dim), arg(dim), z(dim);
    for (std::size_t node = begin; node < end; ++node) {
      spec.node_coords(node, coord.data());
      const NodeContext ctx =
          node_context(coeffs, coord, g.values()(static_cast<Eigen::Index>(node)));
      double total = 1.0;
      for (int l = 0; l < peers; ++l) {
        peer_mean(ctx, l, mu);
        double integral = 0.0;
        if (scheme.kind == IntegrationScheme::Kind::GaussHermite) {
          for (Eigen::Index q = 0; q < gh_eps.cols(); ++q) {
            arg = mu + gh_eps.col(q);
            integral += gh_w(q) * normal_cdf(big_m(g, coeffs, ctx.x, arg));
          }
        } else {
          Rng rng = Rng::substream(scheme.seed,
                                   node * static_cast<std::size_t>(peers) +
                                       static_cast<std::size_t>(l));
          double acc = 0.0;
          for (std::int64_t s = 0; s < scheme.mc_samples; ++s) {
            for (int a = 0; a < dim; ++a) z(a) = rng.normal();
            arg = mu + chol * z;
            acc += normal_cdf(big_m(g, coeffs, ctx.x, arg));
          }
          integral = acc / static_cast<double>(scheme.mc_samples);
        }
        total += integral;
      }
      if (!std::isfinite(total)) {
        throw NumericalFailure("apply_T: non-finite update at node " +
                               std::to_string(node));
      }
      out(static_cast<Eigen::Index>(node)) =
          std::clamp(total, 1.0, static_cast<double>(coeffs.n));
    }
  });

  GridFunction updated(spec, std::move(out), coeffs.a_n, 1.0,
                       static_cast<double>(coeffs.n));
  return symmetrize(updated);
}

GridSpec default_grid(const GameParams& params, const BeliefCoefficients& coeffs) {
  const int dim = params.n - 1;
  if (dim > 4) {
    throw std::invalid_argument(
        "default_grid: tensor grids are limited to four axes; larger games need a "
        "different function representation");
  }
  const double margin = 5.0 * std::sqrt(std::max(params.sigma2, params.tau2));
  const double lo = (1.0 - margin) / coeffs.a_n;
  const double hi = (params.n + margin) / coeffs.a_n;
  int points = 17;
  if (params.n == 2) points = 257;
  if (params.n == 3) points = 65;
  if (params.n == 4) points = 33;

  GridSpec spec;
  spec.lower = Eigen::VectorXd::Constant(dim, lo);
  spec.upper = Eigen::VectorXd::Constant(dim, hi);
  spec.points.assign(dim, points);
  return spec;
}

namespace {

// Rough size of the integration bias: for Gauss-Hermite, compare one sweep
// against a richer rule; for Monte Carlo, the binomial standard error summed
// over peers.
double integration_error_estimate(const GridFunction& g,
                                  const BeliefCoefficients& coeffs,
                                  const IntegrationScheme& scheme) {
  if (scheme.kind == IntegrationScheme::Kind::MonteCarlo) {
    return 0.5 * (coeffs.n - 1) / std::sqrt(static_cast<double>(scheme.mc_samples));
  }
  IntegrationScheme richer = scheme;
  richer.gh_nodes = scheme.gh_nodes + 8;
  const GridFunction base = apply_T(g, coeffs, scheme);
  const GridFunction refined = apply_T(g, coeffs, richer);
  return std::max(sup_distance(base, refined), 1e-15);
}

}  // namespace

SolveResult solve(const GameParams& params, const SolveOptions& options) {
  params.validate();
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  if (options.max_iter < 0) throw std::invalid_argument("solve: max_iter must be >= 0");

  const BeliefCoefficients coeffs = compute_coefficients(params);
  GridSpec spec = options.grid ? *options.grid : default_grid(params, coeffs);
  spec.validate();
  if (spec.dim() != params.n - 1) {
    throw std::invalid_argument("solve: grid dimension does not match the game");
  }

  GridFunction g = options.initial
                       ? *options.initial
                       : GridFunction::constant(spec, 0.5 * (params.n + 1),
                                                coeffs.a_n, 1.0,
                                                static_cast<double>(params.n));
  if (!(g.spec() == spec)) {
    throw std::invalid_argument("solve: initial function lives on a different grid");
  }

  SolveDiagnostics diag;
  diag.condition = check_conditions(params);
  diag.banach_warning = !diag.condition.banach_ok;

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };

  if (std::isinf(options.tol)) {
    // degenerate stopping rule: any step is small enough, do no work
    diag.converged = true;
    diag.final_lipschitz_ratio = check_lipschitz(g).worst_ratio;
    diag.wall_time_seconds = elapsed();
    return {ThresholdFunction{std::move(g), coeffs}, std::move(diag)};
  }

  diag.integration_error_estimate =
      integration_error_estimate(g, coeffs, options.scheme);

  int rising = 0;
  double previous_delta = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iter; ++it) {
    GridFunction next = apply_T(g, coeffs, options.scheme);
    const double delta = sup_distance(next, g);
    diag.sup_deltas.push_back(delta);
    diag.iterations = it + 1;
    g = std::move(next);
    if (options.on_iterate) options.on_iterate(it + 1, g);
    if (delta <= options.tol) {
      diag.converged = true;
      break;
    }
    if (!diag.condition.banach_ok) {
      rising = delta > previous_delta ? rising + 1 : 0;
      if (rising >= 10) {
        diag.final_lipschitz_ratio = check_lipschitz(g).worst_ratio;
        diag.wall_time_seconds = elapsed();
        throw DivergenceError(std::move(diag));
      }
    }
    previous_delta = delta;
  }

  diag.final_lipschitz_ratio = check_lipschitz(g).worst_ratio;
  diag.wall_time_seconds = elapsed();
  return {ThresholdFunction{std::move(g), coeffs}, std::move(diag)};
}

}  // namespace gglab
