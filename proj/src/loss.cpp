#include "snl/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace snl {

void LossSpec::validate(const SnlProblem& p) const {
  if (inside_degree < 1.0 || outside_degree < 1.0)
    throw std::invalid_argument("LossSpec: degrees must be >= 1");
  if (ambient_dim != 0 && ambient_dim < p.dim)
    throw std::invalid_argument("LossSpec: ambient_dim below problem dim");
}

SensorConfig config_from_positions(const std::vector<Eigen::VectorXd>& positions,
                                   int ambient_dim) {
  SensorConfig x = SensorConfig::Zero(ambient_dim * positions.size());
  for (size_t i = 0; i < positions.size(); ++i) {
    if (positions[i].size() > ambient_dim)
      throw std::invalid_argument("config_from_positions: dim overflow");
    x.segment(ambient_dim * i, positions[i].size()) = positions[i];
  }
  return x;
}

std::vector<Eigen::VectorXd> positions_from_config(const SensorConfig& x,
                                                   int n_sensors,
                                                   int ambient_dim) {
  if (x.size() != static_cast<Eigen::Index>(n_sensors) * ambient_dim)
    throw std::invalid_argument("positions_from_config: length mismatch");
  std::vector<Eigen::VectorXd> out;
  out.reserve(n_sensors);
  for (int i = 0; i < n_sensors; ++i)
    out.push_back(x.segment(ambient_dim * i, ambient_dim));
  return out;
}

namespace {

void check_config(const SnlProblem& p, const LossSpec& spec,
                  const SensorConfig& x) {
  spec.validate(p);
  const Eigen::Index want =
      static_cast<Eigen::Index>(p.topology.n_sensors()) * spec.resolved_dim(p);
  if (x.size() != want)
    throw std::invalid_argument("SensorConfig: length must be D * n_sensors");
}

// ||a - xj||^2 where a lives in the problem dimension and xj in ambient
// dimension D: the anchor is zero-padded beyond d.
double padded_sq_dist(const Eigen::VectorXd& anchor,
                      const Eigen::Ref<const Eigen::VectorXd>& xj) {
  const int d = static_cast<int>(anchor.size());
  double s = (anchor - xj.head(d)).squaredNorm();
  s += xj.tail(xj.size() - d).squaredNorm();
  return s;
}

double term_value(double sq_norm, double dist, double b, double c) {
  double inner;
  if (b == 2.0) {
    inner = sq_norm - dist * dist;
  } else {
    inner = std::pow(sq_norm, b / 2.0) - std::pow(dist, b);
  }
  const double a = std::abs(inner);
  if (c == 1.0) return a;
  if (c == 2.0) return inner * inner;
  return std::pow(a, c);
}

// d/d(u) of | ||u||^b - dist^b |^c expressed as w(u) * u: returns w.
double term_grad_weight(double sq_norm, double dist, double b, double c) {
  double inner, inner_w;  // inner_w: gradient of ||u||^b is inner_w * u
  if (b == 2.0) {
    inner = sq_norm - dist * dist;
    inner_w = 2.0;
  } else {
    inner = std::pow(sq_norm, b / 2.0) - std::pow(dist, b);
    inner_w = sq_norm > 0.0 ? b * std::pow(sq_norm, b / 2.0 - 1.0) : 0.0;
  }
  double outer;
  if (c == 1.0) {
    outer = inner > 0.0 ? 1.0 : (inner < 0.0 ? -1.0 : 0.0);
  } else if (c == 2.0) {
    outer = 2.0 * inner;
  } else {
    const double a = std::abs(inner);
    outer = a > 0.0 ? c * std::pow(a, c - 1.0) * (inner > 0.0 ? 1.0 : -1.0) : 0.0;
  }
  return outer * inner_w;
}

}  // namespace

double loss_eval(const SnlProblem& p, const LossSpec& spec,
                 const SensorConfig& x) {
  check_config(p, spec, x);
  const int D = spec.resolved_dim(p);
  const double b = spec.inside_degree, c = spec.outside_degree;
  double total = 0.0;
  const auto& ess = p.topology.edges_ss();
  for (size_t k = 0; k < ess.size(); ++k) {
    const double sq =
        (x.segment(D * ess[k].i, D) - x.segment(D * ess[k].j, D)).squaredNorm();
    total += term_value(sq, p.dist_ss[k], b, c);
  }
  const auto& eas = p.topology.edges_as();
  for (size_t k = 0; k < eas.size(); ++k) {
    const double sq =
        padded_sq_dist(p.anchors[eas[k].anchor], x.segment(D * eas[k].sensor, D));
    total += term_value(sq, p.dist_as[k], b, c);
  }
  return total;
}

SensorConfig loss_grad(const SnlProblem& p, const LossSpec& spec,
                       const SensorConfig& x) {
  check_config(p, spec, x);
  const int D = spec.resolved_dim(p);
  const int d = p.dim;
  const double b = spec.inside_degree, c = spec.outside_degree;
  SensorConfig g = SensorConfig::Zero(x.size());
  const auto& ess = p.topology.edges_ss();
  for (size_t k = 0; k < ess.size(); ++k) {
    const Eigen::VectorXd u =
        x.segment(D * ess[k].i, D) - x.segment(D * ess[k].j, D);
    const double w = term_grad_weight(u.squaredNorm(), p.dist_ss[k], b, c);
    g.segment(D * ess[k].i, D) += w * u;
    g.segment(D * ess[k].j, D) -= w * u;
  }
  const auto& eas = p.topology.edges_as();
  for (size_t k = 0; k < eas.size(); ++k) {
    const auto xj = x.segment(D * eas[k].sensor, D);
    Eigen::VectorXd u = xj;  // xj - padded anchor
    u.head(d) -= p.anchors[eas[k].anchor];
    const double w = term_grad_weight(u.squaredNorm(), p.dist_as[k], b, c);
    g.segment(D * eas[k].sensor, D) += w * u;
  }
  return g;
}

std::vector<std::pair<double, double>> loss_along_segment(
    const SnlProblem& p, const LossSpec& spec, const SensorConfig& x0,
    const SensorConfig& x1, int samples) {
  if (samples < 2) throw std::invalid_argument("loss_along_segment: samples >= 2");
  if (x0.size() != x1.size())
    throw std::invalid_argument("loss_along_segment: endpoint dim mismatch");
  std::vector<std::pair<double, double>> out;
  out.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    out.emplace_back(t, loss_eval(p, spec, x0 + t * (x1 - x0)));
  }
  return out;
}

}  // namespace snl
