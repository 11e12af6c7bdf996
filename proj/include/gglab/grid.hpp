#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

namespace gglab {

// Uniform tensor grid. Node addressing is row-major with the last axis
// fastest; endpoints are hit exactly (the last node of an axis is `upper`
// itself, not lower + k*spacing recomputed).
struct GridSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<int> points;

  int dim() const { return static_cast<int>(points.size()); }
  std::size_t node_count() const;
  double spacing(int axis) const {
    return (upper(axis) - lower(axis)) / (points[axis] - 1);
  }
  double coord(int axis, int index) const {
    return index == points[axis] - 1 ? upper(axis)
                                     : lower(axis) + index * spacing(axis);
  }
  void node_coords(std::size_t node, double* out) const;
  void validate() const;
  bool operator==(const GridSpec& other) const;
};

// A function sampled on a GridSpec, evaluated anywhere by multilinear
// interpolation and extended by clamping outside the box. Values live in
// [lo, hi]; lipschitz_bound is the L1 Lipschitz parameter the function is
// supposed to respect (see check_lipschitz). Immutable after construction.
class GridFunction {
 public:
  GridFunction(GridSpec spec, Eigen::VectorXd values, double lipschitz_bound,
               double lo, double hi);

  static GridFunction constant(GridSpec spec, double value,
                               double lipschitz_bound, double lo, double hi);

  const GridSpec& spec() const { return spec_; }
  const Eigen::VectorXd& values() const { return values_; }
  double lipschitz_bound() const { return lipschitz_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  // multilinear interpolation; queries outside the box are clamped to it,
  // NaN queries are rejected
  double eval(const double* query) const;
  double eval(Eigen::Ref<const Eigen::VectorXd> query) const {
    return eval(query.data());
  }

 private:
  GridSpec spec_;
  Eigen::VectorXd values_;
  double lipschitz_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

struct LipschitzCheck {
  bool ok = false;
  double worst_ratio = 0.0;  // worst adjacent-node slope over the bound
};

// Discrete Lipschitz audit: largest |value step| / (bound * spacing) over all
// grid-adjacent node pairs on every axis; ok iff it stays within 1 + 1e-6.
LipschitzCheck check_lipschitz(const GridFunction& g);

// Average over all permutations of the share axes (every axis except the
// first). Identity when there are fewer than two share axes; requires the
// share axes to have identical specs. Idempotent and linear.
GridFunction symmetrize(const GridFunction& g);

double sup_distance(const GridFunction& a, const GridFunction& b);

// CSV serialization: header "axis0,...,axis{d-1},value", one row per node in
// node order, every number printed with 17 significant digits so the
// round-trip is bit-exact.
std::string grid_to_csv(const GridFunction& g);
GridFunction grid_from_csv(const std::string& text, double lipschitz_bound,
                           double lo, double hi);

}  // namespace gglab
