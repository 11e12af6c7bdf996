#include <doctest.h>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "gglab/belief.hpp"
#include "gglab/rng.hpp"
#include "oracles.hpp"

using namespace gglab;

namespace {

GameParams random_params(Rng& rng, int n_lo = 2, int n_hi = 8) {
  GameParams p;
  p.n = n_lo + static_cast<int>(rng.uniform01() * (n_hi - n_lo + 1));
  p.n = std::min(p.n, n_hi);
  // log-uniform variances over (0.01, 100)
  p.sigma2 = std::pow(10.0, rng.uniform(-2.0, 2.0));
  p.tau2 = std::pow(10.0, rng.uniform(-2.0, 2.0));
  return p;
}

ObservationVector random_observation(Rng& rng, int n, double scale = 3.0) {
  Eigen::VectorXd shared(n - 1);
  for (int i = 0; i < n - 1; ++i) shared(i) = rng.uniform(-scale, scale);
  return ObservationVector(rng.uniform(-scale, scale), shared);
}

}  // namespace

TEST_CASE("fusion: single observation is the posterior") {
  const std::array<GaussianEstimate, 1> obs{{{5.0, 2.0}}};
  const auto post = fuse_gaussian_observations(obs);
  CHECK(post.mean == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(post.variance == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("fusion: equal variances meet in the middle and halve the variance") {
  const std::array<GaussianEstimate, 2> obs{{{0.0, 1.0}, {2.0, 1.0}}};
  const auto post = fuse_gaussian_observations(obs);
  CHECK(post.mean == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(post.variance == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("fusion matches the brute-force grid posterior") {
  const std::array<GaussianEstimate, 3> obs{{{1.0, 1.0}, {2.0, 4.0}, {0.0, 0.25}}};
  const auto post = fuse_gaussian_observations(obs);
  const auto brute = oracle::grid_bayes_posterior(obs);
  CHECK(post.mean == doctest::Approx(brute.mean).epsilon(1e-6));
  CHECK(post.variance == doctest::Approx(brute.variance).epsilon(1e-6));
}

TEST_CASE("fusion input validation") {
  CHECK_THROWS_AS(fuse_gaussian_observations({}), std::invalid_argument);
  const std::array<GaussianEstimate, 2> bad{{{1.0, 1.0}, {2.0, 0.0}}};
  CHECK_THROWS_AS(fuse_gaussian_observations(bad), std::invalid_argument);
}

TEST_CASE("fusion is permutation invariant") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<GaussianEstimate> obs;
    const int count = 2 + static_cast<int>(rng.uniform01() * 5);
    for (int i = 0; i < count; ++i) {
      obs.push_back({rng.uniform(-5.0, 5.0), std::pow(10.0, rng.uniform(-1.5, 1.5))});
    }
    const auto forward = fuse_gaussian_observations(obs);
    std::vector<GaussianEstimate> reversed(obs.rbegin(), obs.rend());
    const auto backward = fuse_gaussian_observations(reversed);
    CHECK(forward.mean == doctest::Approx(backward.mean).epsilon(1e-13));
    CHECK(forward.variance == doctest::Approx(backward.variance).epsilon(1e-13));
  }
}

TEST_CASE("coefficients: two agents, sigma2=1, tau2=9") {
  const auto cf = compute_coefficients({2, 1.0, 9.0});
  CHECK(cf.a_n == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
  CHECK(cf.b_n == doctest::Approx(1.0 / 11.0).epsilon(1e-15));
  CHECK(cf.eta2_n == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
  CHECK(cf.gamma2_n == doctest::Approx(18.0 / 11.0).epsilon(1e-14));
  CHECK(cf.c_n == doctest::Approx(9.0 / 11.0).epsilon(1e-14));
  CHECK(cf.d_n == doctest::Approx(2.0 / 11.0).epsilon(1e-14));
  CHECK(cf.e_n == doctest::Approx(9.0 / 11.0).epsilon(1e-14));
  CHECK(cf.a_prev == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cf.eta2_prev == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("coefficients: defining identities hold to machine precision") {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_params(rng);
    const auto cf = compute_coefficients(p);
    CHECK(std::abs(cf.a_n + (p.n - 1) * cf.b_n - 1.0) <= 1e-12);
    CHECK(std::abs(cf.c_n + cf.d_n - 1.0) <= 1e-12);
    CHECK(cf.a_n > cf.b_n);
    CHECK(cf.diag_n > cf.offdiag_n);
  }
}

TEST_CASE("coefficients agree with the ratio-form rederivation") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_params(rng);
    const auto cf = compute_coefficients(p);
    const auto rf = oracle::r_form_coefficients(p.n, p.sigma2, p.tau2);
    CHECK(cf.a_n == doctest::Approx(rf.a_n).epsilon(1e-12));
    CHECK(cf.b_n == doctest::Approx(rf.b_n).epsilon(1e-12));
    CHECK(cf.eta2_n == doctest::Approx(rf.eta2_n).epsilon(1e-12));
    CHECK(cf.gamma2_n == doctest::Approx(rf.gamma2_n).epsilon(1e-12));
    CHECK(cf.c_n == doctest::Approx(rf.c_n).epsilon(1e-12));
    CHECK(cf.d_n == doctest::Approx(rf.d_n).epsilon(1e-12));
  }

  // spot check with hand arithmetic: n=3, sigma2=4, tau2=5
  const auto cf = compute_coefficients({3, 4.0, 5.0});
  const double eta2 = 1.0 / (1.0 / 4.0 + 2.0 / 9.0);
  CHECK(cf.eta2_n == doctest::Approx(eta2).epsilon(1e-14));
  CHECK(cf.a_n == doctest::Approx(eta2 / 4.0).epsilon(1e-14));
  CHECK(cf.b_n == doctest::Approx(eta2 / 9.0).epsilon(1e-14));
}

TEST_CASE("coefficients reject a single agent and bad variances") {
  CHECK_THROWS_AS(compute_coefficients({1, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(compute_coefficients({2, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(compute_coefficients({2, 1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("noisier sharing shifts weight from shares to the own signal") {
  for (int n : {2, 4, 8}) {
    double last_a = -1.0, last_b = 2.0;
    for (double tau2 : {0.1, 1.0, 10.0, 1000.0}) {
      const auto cf = compute_coefficients({n, 1.0, tau2});
      CHECK(cf.a_n > last_a);
      CHECK(cf.b_n < last_b);
      last_a = cf.a_n;
      last_b = cf.b_n;
    }
    const auto limit = compute_coefficients({n, 1.0, 1e8});
    CHECK(std::abs(limit.a_n - 1.0) <= 1e-6);
    CHECK(std::abs(limit.b_n) <= 1e-6);
  }
}

TEST_CASE("posterior: zero observation gives zero mean") {
  const auto cf = compute_coefficients({3, 1.0, 2.0});
  const auto post =
      posterior_theta(cf, ObservationVector(0.0, Eigen::Vector2d(0.0, 0.0)));
  CHECK(post.mean == 0.0);
  CHECK(post.variance == doctest::Approx(cf.eta2_n).epsilon(1e-15));
}

TEST_CASE("posterior: two agents, sigma2=1, tau2=9, x=1.1") {
  const auto cf = compute_coefficients({2, 1.0, 9.0});
  Eigen::VectorXd shared(1);
  shared(0) = 0.0;
  const auto post = posterior_theta(cf, ObservationVector(1.1, shared));
  CHECK(post.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(post.variance == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
}

TEST_CASE("posterior equals generic fusion of the n signals") {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_params(rng, 2, 6);
    const auto cf = compute_coefficients(p);
    const auto y = random_observation(rng, p.n);
    std::vector<GaussianEstimate> obs{{y.own, p.sigma2}};
    for (int q = 0; q < p.n - 1; ++q) {
      obs.push_back({y.shared(q), p.sigma2 + p.tau2});
    }
    const auto fused = fuse_gaussian_observations(obs);
    const auto post = posterior_theta(cf, y);
    CHECK(post.mean == doctest::Approx(fused.mean).epsilon(1e-12));
    CHECK(post.variance == doctest::Approx(fused.variance).epsilon(1e-12));
  }
  CHECK_THROWS_AS(posterior_theta(compute_coefficients({3, 1.0, 1.0}),
                                  ObservationVector(0.0, Eigen::VectorXd::Zero(1))),
                  std::invalid_argument);
}

TEST_CASE("peer law: linearity sends zero observations to zero means") {
  const auto cf = compute_coefficients({4, 2.0, 3.0});
  const auto law =
      peer_conditional_law(cf, ObservationVector(0.0, Eigen::Vector3d::Zero()), 1);
  CHECK(law.mean_xk == 0.0);
  CHECK(law.mean_ylk.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("peer law: two-agent reduction") {
  const auto cf = compute_coefficients({2, 1.0, 9.0});
  Eigen::VectorXd shared(1);
  shared(0) = 0.7;
  const ObservationVector y(1.3, shared);
  const auto law = peer_conditional_law(cf, y, 0);
  CHECK(law.cov_eps.rows() == 1);
  CHECK(law.cov_eps(0, 0) == doctest::Approx(cf.gamma2_n).epsilon(1e-10));
  CHECK(law.var_eps_ik == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(law.mean_ylk.size() == 0);
  // with one agent fewer, the own-signal weight of the previous game is one
  CHECK(law.mean_xk == doctest::Approx(cf.c_n * 1.3 + cf.d_n * 0.7).epsilon(1e-13));
}

TEST_CASE("peer law means agree with the generic conditional machinery") {
  Rng rng(45);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = random_params(rng, 2, 6);
    const auto cf = compute_coefficients(p);
    const auto y = random_observation(rng, p.n);
    const int slot = static_cast<int>(rng.uniform01() * (p.n - 1));
    const auto law = peer_conditional_law(cf, y, slot);
    const auto full = peer_conditional_full(cf, y, slot);
    CHECK(law.mean_xk == doctest::Approx(full.mean(0)).epsilon(1e-10));
    for (int q = 0; q < p.n - 2; ++q) {
      CHECK(law.mean_ylk(q) == doctest::Approx(full.mean(1 + q)).epsilon(1e-10));
    }
    // the conditioner's location posterior is the fundamental's posterior
    const auto post = posterior_theta(cf, y);
    CHECK(full.location_mean == doctest::Approx(post.mean).epsilon(1e-10));
    CHECK(full.location_var == doctest::Approx(post.variance).epsilon(1e-10));
  }
}

TEST_CASE("peer noise covariance: marginals, PSD, and structure") {
  Rng rng(46);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = random_params(rng, 2, 6);
    const auto cf = compute_coefficients(p);
    const Eigen::MatrixXd cov = peer_noise_covariance(cf);
    REQUIRE(cov.rows() == p.n - 1);
    CHECK(std::abs(cov(0, 0) - cf.gamma2_n) <= 1e-10 * std::max(1.0, cf.gamma2_n));
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

    // rank-one-plus-diagonal shape implied by the independent noise sources
    const double shrink = p.tau2 / (p.sigma2 + p.tau2);
    const double common = shrink * shrink * cf.eta2_n;
    const double signal_var = p.sigma2 * p.tau2 / (p.sigma2 + p.tau2);
    for (int r = 0; r < cov.rows(); ++r) {
      for (int c = 0; c < cov.cols(); ++c) {
        const double expected = common + (r == c ? signal_var : 0.0) +
                                (r == c && r > 0 ? p.tau2 : 0.0);
        CHECK(cov(r, c) == doctest::Approx(expected).epsilon(1e-9));
      }
    }
  }
  const auto cf = compute_coefficients({3, 1.0, 1.0});
  CHECK_THROWS_AS(
      peer_conditional_law(cf, ObservationVector(0.0, Eigen::Vector2d::Zero()), 2),
      std::invalid_argument);
}

TEST_CASE("peer law moments match the generative sampler") {
  const auto cf = compute_coefficients({3, 1.0, 2.0});
  Eigen::VectorXd shared(2);
  shared << 0.8, -0.4;
  const ObservationVector y(0.5, shared);
  const auto law = peer_conditional_law(cf, y, 0);

  const long samples = 200000;
  Rng rng(47);
  oracle::MomentAccumulator acc(2);
  double sum_ik = 0.0, sumsq_ik = 0.0;
  for (long s = 0; s < samples; ++s) {
    const auto draw = oracle::sample_peer_observation(cf, y, 0, rng);
    Eigen::VectorXd v(2);
    v << draw.x_k, draw.y_lk(0);
    acc.add(v);
    sum_ik += draw.y_ik;
    sumsq_ik += draw.y_ik * draw.y_ik;
  }
  const Eigen::VectorXd mean = acc.mean();
  const Eigen::MatrixXd cov = acc.covariance();
  const double n = static_cast<double>(samples);

  Eigen::VectorXd expected_mean(2);
  expected_mean << law.mean_xk, law.mean_ylk(0);
  for (int i = 0; i < 2; ++i) {
    const double se = std::sqrt(cov(i, i) / n);
    CHECK(std::abs(mean(i) - expected_mean(i)) <= 4.0 * se);
  }
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double se =
          std::sqrt((cov(r, r) * cov(c, c) + cov(r, c) * cov(r, c)) / n);
      CHECK(std::abs(cov(r, c) - law.cov_eps(r, c)) <= 4.0 * se);
    }
  }
  const double mean_ik = sum_ik / n;
  const double var_ik = sumsq_ik / n - mean_ik * mean_ik;
  CHECK(std::abs(mean_ik - y.own) <= 4.0 * std::sqrt(var_ik / n));
  CHECK(std::abs(var_ik - law.var_eps_ik) <= 4.0 * law.var_eps_ik * std::sqrt(2.0 / n));
}

TEST_CASE("belief map: two-agent structure") {
  const auto cf = compute_coefficients({2, 1.0, 9.0});
  REQUIRE(cf.V.rows() == 2);
  CHECK(cf.V(0, 0) == cf.a_n);
  CHECK(cf.V(0, 1) == cf.b_n);
  CHECK(cf.V(1, 0) == cf.beta_n);
  CHECK(cf.V(1, 1) == cf.diag_n);
}

TEST_CASE("belief map is nonsingular whenever sharing is noisy") {
  Rng rng(48);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_params(rng);
    const auto cf = compute_coefficients(p);
    // Reducing the first column against the others leaves the matrix lower
    // triangular outright: b_n*beta_n equals a_n*offdiag_n as an exact
    // identity (the share-to-signal weight ratio is the same constant at
    // every game size), so the top-row entries vanish and the diagonal
    // (a_n, diag_n - offdiag_n, ...) is strictly positive.
    const double scale = std::max(1.0, std::abs(cf.a_n * cf.offdiag_n));
    CHECK(std::abs(cf.b_n * cf.beta_n - cf.a_n * cf.offdiag_n) <= 1e-12 * scale);
    CHECK(cf.diag_n - cf.offdiag_n > 0.0);
    CHECK(std::abs(cf.V.determinant()) > 0.0);
    // the determinant implied by the triangular form
    const double expected_det =
        cf.a_n * std::pow(cf.diag_n - cf.offdiag_n, p.n - 1);
    CHECK(cf.V.determinant() == doctest::Approx(expected_det).epsilon(1e-8));
  }
}

TEST_CASE("belief map rows reproduce the conditional peer beliefs exactly") {
  Rng rng(49);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_params(rng, 2, 6);
    const auto cf = compute_coefficients(p);
    const auto y = random_observation(rng, p.n);
    Eigen::VectorXd stacked(p.n);
    stacked(0) = y.own;
    stacked.tail(p.n - 1) = y.shared;
    const Eigen::VectorXd beliefs = cf.V * stacked;

    CHECK(beliefs(0) == doctest::Approx(posterior_theta(cf, y).mean).epsilon(1e-12));
    for (int slot = 0; slot < p.n - 1; ++slot) {
      // the same quantity assembled from the peer-law means:
      // a_n E[x_k] + b_n (our signal + expected shares from the others)
      const auto law = peer_conditional_law(cf, y, slot);
      double expected = cf.a_n * law.mean_xk + cf.b_n * y.own;
      for (int q = 0; q < p.n - 2; ++q) expected += cf.b_n * law.mean_ylk(q);
      CHECK(beliefs(1 + slot) == doctest::Approx(expected).epsilon(1e-11));
    }
  }
}

TEST_CASE("belief map row matches a generative Monte-Carlo estimate") {
  const GameParams p{3, 1.0, 1.0};
  const auto cf = compute_coefficients(p);
  Eigen::VectorXd shared(2);
  shared << 1.2, -0.3;
  const ObservationVector y(0.4, shared);
  Eigen::VectorXd stacked(3);
  stacked << y.own, shared(0), shared(1);
  const Eigen::VectorXd beliefs = cf.V * stacked;

  const long samples = 200000;
  Rng rng(50);
  double sum = 0.0, sumsq = 0.0;
  for (long s = 0; s < samples; ++s) {
    const auto draw = oracle::sample_peer_observation(cf, y, 0, rng);
    const double z_k = draw.y_ik + draw.y_lk.sum();
    const double belief = cf.a_n * draw.x_k + cf.b_n * z_k;
    sum += belief;
    sumsq += belief * belief;
  }
  const double mean = sum / samples;
  const double var = sumsq / samples - mean * mean;
  CHECK(std::abs(mean - beliefs(1)) <= 4.0 * std::sqrt(var / samples));

  // the residual spread of a peer's belief is a parameter-only constant
  CHECK(std::abs(var - peer_belief_residual_variance(cf)) <=
        4.0 * var * std::sqrt(2.0 / samples));
}
