#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "snl/model.hpp"

namespace snl {

/// Flat coordinate vector of all sensors, blocks of `ambient_dim` stacked in
/// sensor order.
using SensorConfig = Eigen::VectorXd;

/// Loss family parameters: per-edge term |  ||u||^b - dist^b  |^c summed over
/// sensor-sensor then anchor-sensor edges, with b the inside degree and c the
/// outside degree. `ambient_dim` D >= problem dim; anchors are zero-padded in
/// the trailing D - d coordinates, which gives the directly
/// dimension-augmented loss when D = n + d.
struct LossSpec {
  double inside_degree = 2.0;   // b
  double outside_degree = 1.0;  // c
  int ambient_dim = 0;          // D; 0 means the problem's own dimension

  int resolved_dim(const SnlProblem& p) const {
    return ambient_dim > 0 ? ambient_dim : p.dim;
  }
  void validate(const SnlProblem& p) const;

  static LossSpec plain(double b, double c) { return {b, c, 0}; }
  /// The direct dimension augmentation: D = n + d.
  static LossSpec augmented(const SnlProblem& p, double b, double c) {
    return {b, c, p.topology.n_sensors() + p.dim};
  }
};

SensorConfig config_from_positions(const std::vector<Eigen::VectorXd>& positions,
                                   int ambient_dim);
std::vector<Eigen::VectorXd> positions_from_config(const SensorConfig& x,
                                                   int n_sensors,
                                                   int ambient_dim);

/// Evaluates the loss. Zero exactly when x solves the problem (restricted to
/// the given edges) in ambient dimension D.
double loss_eval(const SnlProblem& p, const LossSpec& spec, const SensorConfig& x);

/// Gradient for smooth cases, a subgradient for c = 1 (the sign of a term
/// sitting exactly on its kink is taken as 0, which keeps descent stationary
/// at exact solutions). For b = c = 2 each sensor-sensor term contributes
/// 4(||xi-xj||^2 - d^2)(xi-xj) to block i and its negation to block j.
SensorConfig loss_grad(const SnlProblem& p, const LossSpec& spec,
                       const SensorConfig& x);

/// Loss sampled along the segment x0 + t (x1 - x0), t uniform on [0, 1].
std::vector<std::pair<double, double>> loss_along_segment(
    const SnlProblem& p, const LossSpec& spec, const SensorConfig& x0,
    const SensorConfig& x1, int samples);

}  // namespace snl
