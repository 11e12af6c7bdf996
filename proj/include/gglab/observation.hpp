#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <utility>

namespace gglab {

// Everything one agent sees: its own signal plus the n-1 relayed signals in a
// fixed slot order. The labelling of peers is immaterial under symmetric
// strategies, but a deterministic order keeps every downstream computation
// reproducible.
struct ObservationVector {
  double own = 0.0;          // the agent's private signal
  Eigen::VectorXd shared;    // relayed signals, one slot per peer
  double shared_sum = 0.0;   // cached sum of `shared`

  ObservationVector() = default;

  ObservationVector(double own_signal, Eigen::VectorXd shared_signals)
      : own(own_signal), shared(std::move(shared_signals)) {
    if (shared.size() < 1) {
      throw std::invalid_argument("ObservationVector: needs at least one shared signal");
    }
    shared_sum = shared.sum();
  }

  int agents() const { return static_cast<int>(shared.size()) + 1; }
};

}  // namespace gglab
