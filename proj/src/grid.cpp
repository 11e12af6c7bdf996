#include "gglab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gglab {

std::size_t GridSpec::node_count() const {
  std::size_t total = 1;
  for (int p : points) total *= static_cast<std::size_t>(p);
  return total;
}

void GridSpec::node_coords(std::size_t node, double* out) const {
  for (int axis = dim() - 1; axis >= 0; --axis) {
    const std::size_t p = static_cast<std::size_t>(points[axis]);
    out[axis] = coord(axis, static_cast<int>(node % p));
    node /= p;
  }
}

void GridSpec::validate() const {
  if (dim() < 1) throw std::invalid_argument("GridSpec: needs at least one axis");
  if (dim() > 8) throw std::invalid_argument("GridSpec: at most eight axes supported");
  if (lower.size() != dim() || upper.size() != dim()) {
    throw std::invalid_argument("GridSpec: bounds do not match the axis count");
  }
  std::size_t total = 1;
  for (int axis = 0; axis < dim(); ++axis) {
    if (!(lower(axis) < upper(axis))) {
      throw std::invalid_argument("GridSpec: lower bound must be below upper bound");
    }
    if (points[axis] < 2) {
      throw std::invalid_argument("GridSpec: every axis needs at least two points");
    }
    if (total > 100000000ull / static_cast<std::size_t>(points[axis])) {
      throw std::invalid_argument("GridSpec: more than 1e8 nodes");
    }
    total *= static_cast<std::size_t>(points[axis]);
  }
}

bool GridSpec::operator==(const GridSpec& other) const {
  return points == other.points && lower.size() == other.lower.size() &&
         (lower.array() == other.lower.array()).all() &&
         (upper.array() == other.upper.array()).all();
}

GridFunction::GridFunction(GridSpec spec, Eigen::VectorXd values,
                           double lipschitz_bound, double lo, double hi)
    : spec_(std::move(spec)),
      values_(std::move(values)),
      lipschitz_(lipschitz_bound),
      lo_(lo),
      hi_(hi) {
  spec_.validate();
  if (static_cast<std::size_t>(values_.size()) != spec_.node_count()) {
    throw std::invalid_argument("GridFunction: value count does not match the grid");
  }
  if (!(lo_ < hi_)) throw std::invalid_argument("GridFunction: empty codomain");
  if (lipschitz_ < 0.0 || !std::isfinite(lipschitz_)) {
    throw std::invalid_argument("GridFunction: bad Lipschitz bound");
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    double& v = values_(i);
    if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite value");
    if (v < lo_ - 1e-9 || v > hi_ + 1e-9) {
      throw std::invalid_argument("GridFunction: value outside the codomain");
    }
    v = std::clamp(v, lo_, hi_);
  }
}

GridFunction GridFunction::constant(GridSpec spec, double value,
                                    double lipschitz_bound, double lo, double hi) {
  spec.validate();
  Eigen::VectorXd values =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(spec.node_count()), value);
  return GridFunction(std::move(spec), std::move(values), lipschitz_bound, lo, hi);
}

double GridFunction::eval(const double* query) const {
  const int d = spec_.dim();
  int base[8];
  double frac[8];
  for (int axis = 0; axis < d; ++axis) {
    const double q = query[axis];
    if (std::isnan(q)) throw std::invalid_argument("GridFunction::eval: NaN query");
    const int last_cell = spec_.points[axis] - 2;
    double t = (q - spec_.lower(axis)) / spec_.spacing(axis);
    if (!(t > 0.0)) t = 0.0;
    int cell = static_cast<int>(t);
    cell = std::clamp(cell, 0, last_cell);
    // reconstruct the cell edges with the node formula so that queries that
    // sit exactly on a node reproduce the stored value bit for bit
    const double x0 = spec_.coord(axis, cell);
    const double x1 = spec_.coord(axis, cell + 1);
    double f = (q - x0) / (x1 - x0);
    base[axis] = cell;
    frac[axis] = std::clamp(f, 0.0, 1.0);
  }

  // strides, last axis fastest
  std::size_t stride[8];
  std::size_t s = 1;
  for (int axis = d - 1; axis >= 0; --axis) {
    stride[axis] = s;
    s *= static_cast<std::size_t>(spec_.points[axis]);
  }
  std::size_t origin = 0;
  for (int axis = 0; axis < d; ++axis) {
    origin += static_cast<std::size_t>(base[axis]) * stride[axis];
  }

  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = origin;
    for (int axis = 0; axis < d; ++axis) {
      if (c & (1 << axis)) {
        w *= frac[axis];
        idx += stride[axis];
      } else {
        w *= 1.0 - frac[axis];
      }
    }
    if (w != 0.0) acc += w * values_(static_cast<Eigen::Index>(idx));
  }
  return acc;
}

LipschitzCheck check_lipschitz(const GridFunction& g) {
  const GridSpec& spec = g.spec();
  const int d = spec.dim();

  std::size_t stride[8];
  std::size_t s = 1;
  for (int axis = d - 1; axis >= 0; --axis) {
    stride[axis] = s;
    s *= static_cast<std::size_t>(spec.points[axis]);
  }

  double worst = 0.0;
  const std::size_t total = spec.node_count();
  std::size_t index[8] = {};
  for (std::size_t node = 0; node < total; ++node) {
    // decode the multi-index once per node
    std::size_t rest = node;
    for (int axis = d - 1; axis >= 0; --axis) {
      index[axis] = rest % static_cast<std::size_t>(spec.points[axis]);
      rest /= static_cast<std::size_t>(spec.points[axis]);
    }
    for (int axis = 0; axis < d; ++axis) {
      if (index[axis] + 1 >= static_cast<std::size_t>(spec.points[axis])) continue;
      const double dv = std::abs(g.values()(static_cast<Eigen::Index>(node + stride[axis])) -
                                 g.values()(static_cast<Eigen::Index>(node)));
      if (dv == 0.0) continue;
      const double allowed = g.lipschitz_bound() * spec.spacing(axis);
      const double ratio = allowed > 0.0
                               ? dv / allowed
                               : std::numeric_limits<double>::infinity();
      worst = std::max(worst, ratio);
    }
  }
  return {worst <= 1.0 + 1e-6, worst};
}

GridFunction symmetrize(const GridFunction& g) {
  const GridSpec& spec = g.spec();
  const int d = spec.dim();
  const int share_axes = d - 1;
  if (share_axes < 2) return g;

  for (int axis = 2; axis < d; ++axis) {
    if (spec.points[axis] != spec.points[1] || spec.lower(axis) != spec.lower(1) ||
        spec.upper(axis) != spec.upper(1)) {
      throw std::invalid_argument("symmetrize: share axes must have identical specs");
    }
  }

  std::vector<int> perm(share_axes);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::size_t stride[8];
  std::size_t s = 1;
  for (int axis = d - 1; axis >= 0; --axis) {
    stride[axis] = s;
    s *= static_cast<std::size_t>(spec.points[axis]);
  }

  const std::size_t total = spec.node_count();
  Eigen::VectorXd out(static_cast<Eigen::Index>(total));
  std::size_t index[8] = {};
  for (std::size_t node = 0; node < total; ++node) {
    std::size_t rest = node;
    for (int axis = d - 1; axis >= 0; --axis) {
      index[axis] = rest % static_cast<std::size_t>(spec.points[axis]);
      rest /= static_cast<std::size_t>(spec.points[axis]);
    }
    double acc = 0.0;
    for (const auto& p : perms) {
      std::size_t idx = index[0] * stride[0];
      for (int a = 0; a < share_axes; ++a) {
        idx += index[1 + p[a]] * stride[1 + a];
      }
      acc += g.values()(static_cast<Eigen::Index>(idx));
    }
    out(static_cast<Eigen::Index>(node)) = acc / static_cast<double>(perms.size());
  }
  return GridFunction(spec, std::move(out), g.lipschitz_bound(), g.lo(), g.hi());
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec() == b.spec())) {
    throw std::invalid_argument("sup_distance: grids differ");
  }
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string grid_to_csv(const GridFunction& g) {
  const GridSpec& spec = g.spec();
  const int d = spec.dim();
  std::string out;
  out.reserve(spec.node_count() * 24 * (d + 1));
  for (int axis = 0; axis < d; ++axis) {
    out += "axis" + std::to_string(axis) + ",";
  }
  out += "value\n";
  std::vector<double> coords(d);
  for (std::size_t node = 0; node < spec.node_count(); ++node) {
    spec.node_coords(node, coords.data());
    for (int axis = 0; axis < d; ++axis) {
      append_number(out, coords[axis]);
      out += ',';
    }
    append_number(out, g.values()(static_cast<Eigen::Index>(node)));
    out += '\n';
  }
  return out;
}

GridFunction grid_from_csv(const std::string& text, double lipschitz_bound,
                           double lo, double hi) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("grid_from_csv: empty input");
  const int d = static_cast<int>(std::count(line.begin(), line.end(), ',')) ;
  if (d < 1) throw std::invalid_argument("grid_from_csv: malformed header");

  std::vector<std::set<double>> axis_values(d);
  std::vector<double> values;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    const char* p = line.c_str();
    char* end = nullptr;
    for (int f = 0; f <= d; ++f) {
      fields.push_back(std::strtod(p, &end));
      if (p == end) throw std::invalid_argument("grid_from_csv: malformed row");
      p = (*end == ',') ? end + 1 : end;
    }
    for (int axis = 0; axis < d; ++axis) axis_values[axis].insert(fields[axis]);
    values.push_back(fields[d]);
  }

  GridSpec spec;
  spec.lower.resize(d);
  spec.upper.resize(d);
  spec.points.resize(d);
  std::size_t expected = 1;
  for (int axis = 0; axis < d; ++axis) {
    if (axis_values[axis].size() < 2) {
      throw std::invalid_argument("grid_from_csv: degenerate axis");
    }
    spec.points[axis] = static_cast<int>(axis_values[axis].size());
    spec.lower(axis) = *axis_values[axis].begin();
    spec.upper(axis) = *axis_values[axis].rbegin();
    expected *= axis_values[axis].size();
  }
  if (expected != values.size()) {
    throw std::invalid_argument("grid_from_csv: row count does not match the lattice");
  }
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(values.data(),
                                                  static_cast<Eigen::Index>(values.size()));
  return GridFunction(std::move(spec), std::move(v), lipschitz_bound, lo, hi);
}

}  // namespace gglab
