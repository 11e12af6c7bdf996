#include "gglab/threshold.hpp"

#include <cmath>
#include <stdexcept>

namespace gglab {

double g_to_Ih(const ThresholdFunction& tf,
               Eigen::Ref<const Eigen::VectorXd> reduced) {
  const auto& cf = tf.coeffs;
  if (reduced.size() != cf.n - 1) {
    throw std::invalid_argument("g_to_Ih: reduced observation has wrong size");
  }
  const double g = tf.g.eval(reduced);
  const double others = reduced.tail(reduced.size() - 1).sum();
  return (g - cf.a_n * reduced(0)) / cf.b_n - others;
}

Eigen::VectorXd reduced_observation(const ObservationVector& y, int slot) {
  const int peers = static_cast<int>(y.shared.size());
  if (slot < 0 || slot >= peers) {
    throw std::invalid_argument("reduced_observation: slot out of range");
  }
  Eigen::VectorXd reduced(peers);  // = n - 1
  reduced(0) = y.own;
  int idx = 1;
  for (int q = 0; q < peers; ++q) {
    if (q == slot) continue;
    reduced(idx++) = y.shared(q);
  }
  return reduced;
}

double eval_h(const ThresholdFunction& tf, const ObservationVector& y, int slot) {
  if (y.agents() != tf.coeffs.n) {
    throw std::invalid_argument("eval_h: observation size does not match n");
  }
  return g_to_Ih(tf, reduced_observation(y, slot)) - y.shared(slot);
}

double root_share(const ThresholdFunction& tf,
                  Eigen::Ref<const Eigen::VectorXd> reduced, double tolerance) {
  const double ih = g_to_Ih(tf, reduced);
  // h(share) = Ih(reduced) - share, so Ih itself is the root; the bisection
  // below keeps the routine honest if the evaluation path ever changes.
  double lo = ih - 1.0, hi = ih + 1.0;
  const auto h_at = [&](double share) { return ih - share; };
  for (int guard = 0; h_at(lo) <= 0.0 && guard < 64; ++guard) lo -= (hi - lo);
  for (int guard = 0; h_at(hi) >= 0.0 && guard < 64; ++guard) hi += (hi - lo);
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (h_at(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace gglab
