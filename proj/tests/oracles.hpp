// Independent reference implementations used only by the test suites. Each
// routine recomputes its quantity through a different route than the library
// (brute-force integration, re-derived algebra, generative sampling, or a
// clean-room reimplementation) so agreement is meaningful.
#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <utility>

#include "gglab/belief.hpp"
#include "gglab/grid.hpp"
#include "gglab/observation.hpp"
#include "gglab/rng.hpp"

namespace oracle {

// Brute-force posterior for independent Gaussian observations of one scalar
// under a flat prior: discretize, multiply likelihoods, normalize, take
// moments. grid_points and the +-10 standard-deviation window follow the
// validation protocol used throughout the tests.
gglab::GaussianEstimate grid_bayes_posterior(std::span<const gglab::GaussianEstimate> obs,
                                             int grid_points = 100000);

// Coefficient algebra re-derived in terms of the noise ratio r^2 = tau2/sigma2
// (a different arrangement of the closed forms than the library uses).
struct RFormCoefficients {
  double eta2_n = 0.0, a_n = 0.0, b_n = 0.0;
  double gamma2_n = 0.0, c_n = 0.0, d_n = 0.0;
};
RFormCoefficients r_form_coefficients(int n, double sigma2, double tau2);

// One draw of a peer's full observation vector from the generative model
// conditioned on our observation: the fundamental is drawn from its
// posterior, each hidden signal from its scalar conditional given the share
// we saw, and the relay noises fresh. No matrix conditioning is involved.
struct PeerSample {
  double x_k = 0.0;        // the peer's own signal
  Eigen::VectorXd y_lk;    // shares the peer receives from the other peers
  double y_ik = 0.0;       // the share the peer receives from us
  double theta = 0.0;
};
PeerSample sample_peer_observation(const gglab::BeliefCoefficients& coeffs,
                                   const gglab::ObservationVector& y, int peer_slot,
                                   gglab::Rng& rng);

// Clean-room evaluation of the update integrand, bookkeeping done with
// explicit agent labels instead of slot arithmetic.
double naive_eval_M(const gglab::GridFunction& g, int n, double sigma2, double tau2,
                    const Eigen::VectorXd& y_reduced, int peer_slot,
                    const Eigen::VectorXd& eps);

// Random member of the admissible class: iid values pushed through the exact
// L1 lower Lipschitz envelope (separable min-plus transform), then
// symmetrized over the share axes.
gglab::GridFunction random_admissible_g(const gglab::GridSpec& spec, double lipschitz,
                                        double lo, double hi, gglab::Rng& rng);

// Streaming mean / unbiased covariance.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int dim)
      : sum_(Eigen::VectorXd::Zero(dim)),
        outer_(Eigen::MatrixXd::Zero(dim, dim)) {}
  void add(const Eigen::VectorXd& x) {
    sum_ += x;
    outer_ += x * x.transpose();
    ++count_;
  }
  long count() const { return count_; }
  Eigen::VectorXd mean() const { return sum_ / static_cast<double>(count_); }
  Eigen::MatrixXd covariance() const {
    const Eigen::VectorXd m = mean();
    return (outer_ - static_cast<double>(count_) * m * m.transpose()) /
           static_cast<double>(count_ - 1);
  }

 private:
  Eigen::VectorXd sum_;
  Eigen::MatrixXd outer_;
  long count_ = 0;
};

// Runs a shell command, returning {exit code, captured stdout}.
std::pair<int, std::string> run_command(const std::string& command);

}  // namespace oracle
