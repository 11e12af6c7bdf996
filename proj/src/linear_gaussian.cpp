#include "gglab/linear_gaussian.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace gglab {

ConditionalGaussian condition(const ImproperLocationModel& model,
                              const Eigen::VectorXd& observed) {
  const auto& S = model.latent_var;
  const auto& B = model.obs_lat;
  const auto& A = model.tgt_lat;
  if (B.cols() != S.size() || A.cols() != S.size()) {
    throw std::invalid_argument("condition: latent dimension mismatch");
  }
  if (B.rows() != model.obs_loc.size() || A.rows() != model.tgt_loc.size() ||
      observed.size() != B.rows()) {
    throw std::invalid_argument("condition: block dimension mismatch");
  }
  if ((S.array() <= 0.0).any()) {
    throw std::invalid_argument("condition: latent variances must be positive");
  }

  const Eigen::MatrixXd BS = B * S.asDiagonal();
  const Eigen::MatrixXd sigma_y = BS * B.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_y);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("condition: observation covariance is singular");
  }

  // flat-prior posterior of the location scalar
  const Eigen::VectorXd w_loc = llt.solve(model.obs_loc);
  const double precision = model.obs_loc.dot(w_loc);
  if (!(precision > 0.0)) {
    throw std::invalid_argument("condition: observations do not identify the location");
  }

  ConditionalGaussian out;
  out.location_var = 1.0 / precision;
  out.location_mean = out.location_var * w_loc.dot(observed);

  const Eigen::MatrixXd cross = A * S.asDiagonal() * B.transpose();  // A S B'
  const Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();
  const Eigen::VectorXd load = model.tgt_loc - gain * model.obs_loc;

  out.mean = gain * observed + load * out.location_mean;
  Eigen::MatrixXd cov = A * S.asDiagonal() * A.transpose() -
                        gain * cross.transpose() +
                        out.location_var * load * load.transpose();
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

}  // namespace gglab
