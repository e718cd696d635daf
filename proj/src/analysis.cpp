#include "snl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace snl {

namespace {

double pow_bc(double base, double e) {
  if (e == 1.0) return base;
  if (e == 2.0) return base * base;
  return std::pow(base, e);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Certificate check_sufficient_condition(const SnlProblem& p,
                                       const std::vector<Eigen::VectorXd>& sensors,
                                       const LossSpec& spec) {
  spec.validate(p);
  if (static_cast<int>(sensors.size()) != p.topology.n_sensors())
    throw std::invalid_argument("check_sufficient_condition: sensor count");
  const double b = spec.inside_degree, c = spec.outside_degree;

  Certificate cert;
  cert.kind = CertificateKind::SufficientCondition;
  for (double d : p.dist_ss) cert.lhs += pow_bc(d, b * c);
  cert.lhs *= 2.0;
  const auto& eas = p.topology.edges_as();
  for (size_t k = 0; k < eas.size(); ++k) {
    const double mirror = (p.anchors[eas[k].anchor] + sensors[eas[k].sensor]).norm();
    cert.rhs += pow_bc(std::abs(pow_bc(mirror, b) - pow_bc(p.dist_as[k], b)), c);
  }

  if (cert.valid()) {
    const int D = spec.resolved_dim(p);
    const SensorConfig s = config_from_positions(sensors, D);
    const SensorConfig mid = SensorConfig::Zero(s.size());
    cert.midpoint_lhs = 2.0 * loss_eval(p, spec, mid);
    cert.midpoint_rhs = loss_eval(p, spec, s) + loss_eval(p, spec, -s);
    cert.witness_verified = cert.midpoint_lhs > cert.midpoint_rhs;
    cert.witness = std::make_tuple(s, -s, 0.5);
  }
  return cert;
}

Certificate check_sufficient_condition(const Framework& fw, const LossSpec& spec) {
  return check_sufficient_condition(problem_from_framework(fw), fw.sensors, spec);
}

Certificate check_segment_midpoint(const SnlProblem& p, const LossSpec& spec,
                                   const SensorConfig& x0, const SensorConfig& x1) {
  Certificate cert;
  cert.kind = CertificateKind::MidpointViolation;
  const SensorConfig mid = 0.5 * (x0 + x1);
  cert.lhs = 2.0 * loss_eval(p, spec, mid);
  cert.rhs = loss_eval(p, spec, x0) + loss_eval(p, spec, x1);
  cert.midpoint_lhs = cert.lhs;
  cert.midpoint_rhs = cert.rhs;
  if (cert.valid()) {
    cert.witness = std::make_tuple(x0, x1, 0.5);
    cert.witness_verified = true;
  }
  return cert;
}

std::optional<Certificate> segment_convexity_scan(
    const SnlProblem& p, const LossSpec& spec, const Rect& box, int n_segments,
    int samples_per_segment, std::uint64_t seed, double tol) {
  if (n_segments < 1 || samples_per_segment < 1)
    throw std::invalid_argument("segment_convexity_scan: counts >= 1");
  box.validate();
  const int S = std::max(3, samples_per_segment);
  Rng rng(seed);
  std::vector<double> f(S);
  for (int seg = 0; seg < n_segments; ++seg) {
    const SensorConfig a = box.sample(rng);
    const SensorConfig b = box.sample(rng);
    for (int k = 0; k < S; ++k) {
      const double t = static_cast<double>(k) / (S - 1);
      f[k] = loss_eval(p, spec, a + t * (b - a));
    }
    // Arithmetic triples i < j < k with i + k = 2j.
    for (int j = 1; j < S - 1; ++j) {
      const int reach = std::min(j, S - 1 - j);
      for (int w = 1; w <= reach; ++w) {
        if (2.0 * f[j] > f[j - w] + f[j + w] + tol) {
          Certificate cert;
          cert.kind = CertificateKind::SegmentViolation;
          cert.lhs = 2.0 * f[j];
          cert.rhs = f[j - w] + f[j + w];
          const double ti = static_cast<double>(j - w) / (S - 1);
          const double tk = static_cast<double>(j + w) / (S - 1);
          cert.witness = std::make_tuple(a + ti * (b - a), a + tk * (b - a), 0.5);
          cert.witness_verified = true;
          cert.midpoint_lhs = cert.lhs;
          cert.midpoint_rhs = cert.rhs;
          return cert;
        }
      }
    }
  }
  return std::nullopt;
}

double p_r_for_rectangle(const Rect& region, double r, double eps) {
  region.validate();
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("p_r_for_rectangle: eps in (0,1)");
  if (!(r > 0.0)) throw std::invalid_argument("p_r_for_rectangle: r > 0");
  if (r > region.min_side())
    throw std::invalid_argument(
        "p_r_for_rectangle: r exceeds the shortest side; the corner "
        "quarter-annulus guarantee does not apply");
  const double annulus = 0.25 * M_PI * r * r * (1.0 - eps * eps);
  return annulus / region.volume();
}

double disk_rect_area(const Rect& rect, const Eigen::VectorXd& center,
                      double radius) {
  if (rect.dim() != 2 || center.size() != 2)
    throw std::invalid_argument("disk_rect_area: 2-D only");
  if (!(radius > 0.0)) return 0.0;
  // Shift the disk to the origin and substitute x = r sin(theta), which
  // removes the sqrt singularity at the circle edge. The chord length is
  // min(y2, h) - max(y1, -h) with h = r cos(theta); its min/max selections
  // are constant between breakpoints, so each piece integrates in closed
  // form as A r sin(theta) + B r^2 (theta + sin cos)/2.
  const double r = radius;
  const double x1 = std::max(rect.lo[0] - center[0], -r);
  const double x2 = std::min(rect.hi[0] - center[0], r);
  if (x2 <= x1) return 0.0;
  const double y1 = rect.lo[1] - center[1];
  const double y2 = rect.hi[1] - center[1];
  if (y2 <= -r || y1 >= r) return 0.0;

  const double ta = std::asin(std::clamp(x1 / r, -1.0, 1.0));
  const double tb = std::asin(std::clamp(x2 / r, -1.0, 1.0));
  std::vector<double> cuts = {ta, tb};
  if (ta < 0.0 && tb > 0.0) cuts.push_back(0.0);
  for (double v : {std::abs(y1), std::abs(y2)}) {
    if (v < r) {
      const double t = std::acos(v / r);
      if (t > ta && t < tb) cuts.push_back(t);
      if (-t > ta && -t < tb) cuts.push_back(-t);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  double area = 0.0;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    if (hi - lo < 1e-15) continue;
    const double h_mid = r * std::cos(0.5 * (lo + hi));
    const bool top_is_y2 = y2 <= h_mid;
    const bool bot_is_y1 = y1 >= -h_mid;
    const double chord_mid =
        (top_is_y2 ? y2 : h_mid) - (bot_is_y1 ? y1 : -h_mid);
    if (chord_mid <= 0.0) continue;
    const double a_const = (top_is_y2 ? y2 : 0.0) - (bot_is_y1 ? y1 : 0.0);
    const double b_coef = (top_is_y2 ? 0.0 : 1.0) + (bot_is_y1 ? 0.0 : 1.0);
    area += a_const * r * (std::sin(hi) - std::sin(lo));
    area += b_coef * r * r * 0.5 *
            ((hi - lo) + std::sin(hi) * std::cos(hi) - std::sin(lo) * std::cos(lo));
  }
  return area;
}

double p_r_grid(const Rect& region, double r, double eps, int grid) {
  region.validate();
  if (region.dim() != 2)
    throw std::invalid_argument("p_r_grid: 2-D regions only");
  if (!(eps > 0.0) || !(eps < 1.0) || !(r > 0.0) || grid < 2)
    throw std::invalid_argument("p_r_grid: bad parameters");
  const double vol = region.volume();
  double worst = 1.0;
  for (int iy = 0; iy < grid; ++iy) {
    for (int ix = 0; ix < grid; ++ix) {
      Eigen::Vector2d pos(
          region.lo[0] + (region.hi[0] - region.lo[0]) * ix / (grid - 1),
          region.lo[1] + (region.hi[1] - region.lo[1]) * iy / (grid - 1));
      const double a =
          disk_rect_area(region, pos, r) - disk_rect_area(region, pos, eps * r);
      worst = std::min(worst, a / vol);
    }
  }
  return std::max(0.0, worst);
}

double theoretical_bound(long long n, double p_r) {
  if (n < 1) throw std::invalid_argument("theoretical_bound: n >= 1");
  if (!(p_r > 0.0) || !(p_r < 1.0))
    throw std::invalid_argument("theoretical_bound: p_r in (0,1)");
  const long long v = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(n))));
  // log of n * v * C(n-1, v-1) * (1-p_r)^(n-v)
  const double log_term = std::log(static_cast<double>(n)) +
                          std::log(static_cast<double>(v)) +
                          std::lgamma(static_cast<double>(n)) -
                          std::lgamma(static_cast<double>(v)) -
                          std::lgamma(static_cast<double>(n - v + 1)) +
                          static_cast<double>(n - v) * std::log1p(-p_r);
  return 1.0 - std::exp(log_term);
}

bool lemma_gate(long long n, double p_r) {
  const long long v = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(n))));
  return static_cast<double>(n - 1) * p_r >= static_cast<double>(v - 1);
}

WilsonInterval wilson_interval(int successes, int trials, double z) {
  if (trials < 1) throw std::invalid_argument("wilson_interval: trials >= 1");
  const double n = trials;
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::string McReport::to_csv() const {
  std::string out =
      "n,trials,fraction,ci_low,ci_high,bound_raw,bound_clamped,lemma_gate_ok\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  r.n, r.trials, r.fraction, r.ci_low, r.ci_high, r.bound_raw,
                  r.bound_clamped, r.lemma_gate_ok ? 1 : 0);
    out += buf;
  }
  return out;
}

McReport monte_carlo_nonconvexity(const UnitDiskCase& c, const LossSpec& spec,
                                  const std::vector<int>& n_list,
                                  int trials_per_n, std::uint64_t seed,
                                  double eps) {
  if (trials_per_n < 1)
    throw std::invalid_argument("monte_carlo_nonconvexity: trials >= 1");
  c.validate();

  McReport rep;
  rep.region = c.region;
  rep.radius = c.radius;
  rep.eps = eps;
  rep.inside_degree = spec.inside_degree;
  rep.outside_degree = spec.outside_degree;
  rep.anchors = c.anchors;
  rep.seed = seed;

  // p_r: corner formula when the guarantee applies, numeric grid otherwise.
  double p_r = std::numeric_limits<double>::quiet_NaN();
  if (c.radius <= c.region.min_side()) {
    p_r = p_r_for_rectangle(c.region, c.radius, eps);
  } else if (c.region.dim() == 2) {
    const double g = p_r_grid(c.region, c.radius, eps);
    p_r = g > 0.0 ? g : std::numeric_limits<double>::quiet_NaN();
  }
  rep.p_r = p_r;

  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  for (int n : ns) {
    McRow row;
    row.n = n;
    row.trials = trials_per_n;
    UnitDiskCase cn = c;
    cn.n_sensors = n;
    for (int trial = 0; trial < trials_per_n; ++trial) {
      const auto fw = sample_unit_disk(cn, Rng::mix(seed, n, trial));
      if (check_sufficient_condition(fw, spec).valid()) row.certified++;
    }
    row.fraction = static_cast<double>(row.certified) / trials_per_n;
    const auto ci = wilson_interval(row.certified, trials_per_n);
    row.ci_low = ci.low;
    row.ci_high = ci.high;
    if (std::isfinite(p_r)) {
      row.bound_raw = theoretical_bound(n, p_r);
      row.bound_clamped = std::clamp(row.bound_raw, 0.0, 1.0);
      row.lemma_gate_ok = lemma_gate(n, p_r);
    } else {
      row.bound_raw = std::numeric_limits<double>::quiet_NaN();
      row.bound_clamped = std::numeric_limits<double>::quiet_NaN();
      row.lemma_gate_ok = false;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

Certificate augmented_nonconvexity(const Framework& fw, const LossSpec& base,
                                   int aug_dim) {
  const int D = aug_dim > 0
                    ? aug_dim
                    : fw.topology.n_sensors() + fw.dim;
  if (D < fw.dim)
    throw std::invalid_argument("augmented_nonconvexity: aug_dim below dim");
  LossSpec spec = base;
  spec.ambient_dim = D;
  return check_sufficient_condition(problem_from_framework(fw), fw.sensors, spec);
}

SensorConfig lift_path(const SensorConfig& p_cfg, const SensorConfig& q_cfg,
                       int dim, double t) {
  if (p_cfg.size() != q_cfg.size() || dim < 1 || p_cfg.size() % dim != 0)
    throw std::invalid_argument("lift_path: config dims mismatch");
  const int n = static_cast<int>(p_cfg.size()) / dim;
  const double ct = std::cos(M_PI * t);
  const double st = std::sin(M_PI * t);
  SensorConfig out(2 * dim * n);
  for (int i = 0; i < n; ++i) {
    const auto pi = p_cfg.segment(dim * i, dim);
    const auto qi = q_cfg.segment(dim * i, dim);
    out.segment(2 * dim * i, dim) = 0.5 * (pi + qi) + ct * 0.5 * (pi - qi);
    out.segment(2 * dim * i + dim, dim) = st * 0.5 * (pi - qi);
  }
  return out;
}

double verify_path_isometry(const SnlProblem& p, const SensorConfig& p_cfg,
                            const SensorConfig& q_cfg, int samples,
                            double solution_tol) {
  p.validate();
  if (samples < 2) throw std::invalid_argument("verify_path_isometry: samples >= 2");
  const LossSpec check{2.0, 1.0, 0};
  const double lp = loss_eval(p, check, p_cfg);
  const double lq = loss_eval(p, check, q_cfg);
  if (lp > solution_tol || lq > solution_tol)
    throw std::invalid_argument(
        "verify_path_isometry: inputs are not solutions (losses " + fmt(lp) +
        ", " + fmt(lq) + ")");

  const int d = p.dim;
  const int D = 2 * d;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    const SensorConfig z = lift_path(p_cfg, q_cfg, d, t);
    const auto& ess = p.topology.edges_ss();
    for (size_t e = 0; e < ess.size(); ++e) {
      const double dist =
          (z.segment(D * ess[e].i, D) - z.segment(D * ess[e].j, D)).norm();
      worst = std::max(worst, std::abs(dist - p.dist_ss[e]));
    }
    const auto& eas = p.topology.edges_as();
    for (size_t e = 0; e < eas.size(); ++e) {
      const auto zj = z.segment(D * eas[e].sensor, D);
      double sq = (p.anchors[eas[e].anchor] - zj.head(d)).squaredNorm() +
                  zj.tail(d).squaredNorm();
      worst = std::max(worst, std::abs(std::sqrt(sq) - p.dist_as[e]));
    }
  }
  return worst;
}

std::string LandscapeGrid::to_csv() const {
  std::string out = "x,y,loss\n";
  char buf[128];
  for (size_t iy = 0; iy < ys.size(); ++iy) {
    for (size_t ix = 0; ix < xs.size(); ++ix) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", xs[ix], ys[iy],
                    values(iy, ix));
      out += buf;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> LandscapeGrid::local_minima() const {
  std::vector<std::pair<int, int>> out;
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());
  for (int iy = 1; iy + 1 < ny; ++iy) {
    for (int ix = 1; ix + 1 < nx; ++ix) {
      const double v = values(iy, ix);
      bool ok = true;
      for (int dy = -1; dy <= 1 && ok; ++dy)
        for (int dx = -1; dx <= 1 && ok; ++dx)
          if (dx != 0 || dy != 0) ok = v <= values(iy + dy, ix + dx);
      if (ok) out.emplace_back(ix, iy);
    }
  }
  return out;
}

LandscapeGrid landscape_grid(const SnlProblem& p, const LossSpec& spec,
                             int sensor_index, const Rect& window, int res_x,
                             int res_y, const SensorConfig& fixed) {
  if (p.dim != 2)
    throw std::invalid_argument("landscape_grid: 2-D problems only");
  if (window.dim() != 2) throw std::invalid_argument("landscape_grid: 2-D window");
  if (sensor_index < 0 || sensor_index >= p.topology.n_sensors())
    throw std::out_of_range("landscape_grid: sensor index");
  if (res_x < 2 || res_y < 2)
    throw std::invalid_argument("landscape_grid: resolution >= 2");
  const int D = spec.resolved_dim(p);
  if (D != 2)
    throw std::invalid_argument("landscape_grid: ambient dimension must be 2");

  LandscapeGrid grid;
  grid.xs.resize(res_x);
  grid.ys.resize(res_y);
  for (int i = 0; i < res_x; ++i)
    grid.xs[i] = window.lo[0] + (window.hi[0] - window.lo[0]) * i / (res_x - 1);
  for (int i = 0; i < res_y; ++i)
    grid.ys[i] = window.lo[1] + (window.hi[1] - window.lo[1]) * i / (res_y - 1);
  grid.values.resize(res_y, res_x);

  SensorConfig x = fixed;
  for (int iy = 0; iy < res_y; ++iy) {
    for (int ix = 0; ix < res_x; ++ix) {
      x[2 * sensor_index] = grid.xs[ix];
      x[2 * sensor_index + 1] = grid.ys[iy];
      grid.values(iy, ix) = loss_eval(p, spec, x);
    }
  }
  return grid;
}

std::string certificate_to_json(const Certificate& cert) {
  nlohmann::ordered_json j;
  switch (cert.kind) {
    case CertificateKind::SufficientCondition: j["kind"] = "sufficient_condition"; break;
    case CertificateKind::MidpointViolation: j["kind"] = "midpoint_violation"; break;
    case CertificateKind::SegmentViolation: j["kind"] = "segment_violation"; break;
  }
  j["lhs"] = cert.lhs;
  j["rhs"] = cert.rhs;
  j["valid"] = cert.valid();
  if (cert.witness) {
    const auto& [x0, x1, t] = *cert.witness;
    auto vec = [](const SensorConfig& v) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (int k = 0; k < v.size(); ++k) a.push_back(v[k]);
      return a;
    };
    j["witness"] = {{"x0", vec(x0)}, {"x1", vec(x1)}, {"t", t}};
    j["witness_verified"] = cert.witness_verified;
    j["midpoint_lhs"] = cert.midpoint_lhs;
    j["midpoint_rhs"] = cert.midpoint_rhs;
  } else {
    j["witness"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace snl
