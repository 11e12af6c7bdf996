#pragma once

#include <stdexcept>

namespace gglab {

// One game instance: n agents observe a common scalar fundamental through
// private Gaussian noise (variance sigma2) and relay their signals to every
// other agent through an additional, independent Gaussian channel (variance
// tau2). Everything else in the toolkit is derived from these three numbers.
struct GameParams {
  int n = 2;
  double sigma2 = 1.0;
  double tau2 = 1.0;

  void validate() const {
    if (n < 2) {
      throw std::invalid_argument("GameParams: at least two agents required");
    }
    if (!(sigma2 > 0.0)) {
      throw std::invalid_argument("GameParams: sigma2 must be positive");
    }
    if (!(tau2 > 0.0)) {
      // tau2 == 0 would make the relayed signals exact copies; the model
      // requires the sharing channel to be noisy.
      throw std::invalid_argument("GameParams: tau2 must be positive");
    }
  }
};

}  // namespace gglab
