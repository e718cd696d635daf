#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "snl/rng.hpp"

namespace snl {

/// Axis-aligned rectangle (box) in R^d.
struct Rect {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }

  double volume() const { return (hi - lo).prod(); }

  double min_side() const { return (hi - lo).minCoeff(); }

  double diameter() const { return (hi - lo).norm(); }

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
    if (x.size() != lo.size()) return false;
    return (x.array() >= lo.array() - tol).all() &&
           (x.array() <= hi.array() + tol).all();
  }

  /// Uniform sample; coordinates drawn in index order for reproducibility.
  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd x(dim());
    for (int k = 0; k < dim(); ++k) x[k] = rng.uniform(lo[k], hi[k]);
    return x;
  }

  void validate() const {
    if (lo.size() == 0 || lo.size() != hi.size())
      throw std::invalid_argument("Rect: dimension mismatch");
    if (!((hi - lo).array() > 0.0).all())
      throw std::invalid_argument("Rect: region must have positive volume");
  }

  static Rect cube(int dim, double lo_v, double hi_v) {
    Rect r;
    r.lo = Eigen::VectorXd::Constant(dim, lo_v);
    r.hi = Eigen::VectorXd::Constant(dim, hi_v);
    return r;
  }

  static Rect unit_square() { return cube(2, 0.0, 1.0); }
};

}  // namespace snl
