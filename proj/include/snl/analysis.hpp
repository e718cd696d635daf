#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "snl/loss.hpp"

namespace snl {

enum class CertificateKind {
  SufficientCondition,  // 2 sum d_ij^{bc}  vs  sum | ||a_i+s_j||^b - dist^b |^c
  MidpointViolation,    // 2 loss(mid)      vs  loss(x0) + loss(x1)
  SegmentViolation,     // midpoint form found by the random segment scan
};

/// Evidence of non-convexity. `valid()` iff lhs > rhs. A positive sufficient
/// condition carries the witness triple (s, -s, 0.5) together with the
/// midpoint re-check 2 loss(0) > loss(s) + loss(-s) evaluated through the
/// loss function itself.
struct Certificate {
  CertificateKind kind = CertificateKind::SufficientCondition;
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<std::tuple<SensorConfig, SensorConfig, double>> witness;
  bool witness_verified = false;
  double midpoint_lhs = 0.0;
  double midpoint_rhs = 0.0;

  bool valid() const { return lhs > rhs; }
};

/// The one-point sufficient condition for non-convexity, evaluated at the
/// framework's true sensors s (the segment -s .. s with midpoint 0):
///   lhs = 2 sum_{N_x} d_ij^{bc},
///   rhs = sum_{N_a} | ||a_i + s_j||^b - dist^b |^c.
/// Positive certificates are re-verified via loss_eval and carry the witness.
Certificate check_sufficient_condition(const Framework& fw, const LossSpec& spec);
Certificate check_sufficient_condition(const SnlProblem& p,
                                       const std::vector<Eigen::VectorXd>& sensors,
                                       const LossSpec& spec);

/// Direct midpoint test on one segment.
Certificate check_segment_midpoint(const SnlProblem& p, const LossSpec& spec,
                                   const SensorConfig& x0, const SensorConfig& x1);

/// Random-segment convexity falsifier: samples segments in `box` (config
/// space), evaluates the loss at `samples_per_segment` uniform points, and
/// reports the first arithmetic triple with 2 f(mid) > f(a) + f(b) + tol.
/// nullopt means no violation was found (consistent with convexity so far).
std::optional<Certificate> segment_convexity_scan(
    const SnlProblem& p, const LossSpec& spec, const Rect& box, int n_segments,
    int samples_per_segment, std::uint64_t seed, double tol = 1e-9);

/// Uniform lower bound on P(||s' - x|| in [eps r, r]) over positions x in a
/// rectangle, s' uniform: the worst case sits at a corner where the annulus
/// intersection is exactly a quarter annulus, giving
/// (pi/4) r^2 (1 - eps^2) / area. Requires r <= min side; throws otherwise.
double p_r_for_rectangle(const Rect& region, double r, double eps = 0.5);

/// Numeric fallback for radii beyond the corner guarantee: minimum over a
/// grid x grid lattice of positions of the annulus-overlap probability,
/// computed from exact disk-rectangle intersection areas.
double p_r_grid(const Rect& region, double r, double eps, int grid = 200);

/// Area of disk(center, radius) intersected with the rectangle.
double disk_rect_area(const Rect& rect, const Eigen::VectorXd& center,
                      double radius);

/// The probability bound 1 - n v C(n-1, v-1) (1 - p_r)^{n-v} with
/// v = floor(sqrt(n)), evaluated in log space so huge n cannot overflow.
/// Negative (vacuous) values are returned raw.
double theoretical_bound(long long n, double p_r);

/// Monotonicity gate (n-1) p_r >= floor(sqrt(n)) - 1 required by the bound's
/// derivation; reports rows that fail it rather than suppressing them.
bool lemma_gate(long long n, double p_r);

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};
WilsonInterval wilson_interval(int successes, int trials,
                               double z = 1.959963984540054);

struct McRow {
  int n = 0;
  int trials = 0;
  int certified = 0;
  double fraction = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double bound_raw = 0.0;     // NaN when p_r is unavailable
  double bound_clamped = 0.0; // clamped to [0, 1]
  bool lemma_gate_ok = false;
};

struct McReport {
  std::vector<McRow> rows;  // sorted by n
  Rect region;
  double radius = 0.0;
  double eps = 0.5;
  double p_r = 0.0;  // NaN when unavailable
  double inside_degree = 2.0;
  double outside_degree = 1.0;
  std::vector<Eigen::VectorXd> anchors;
  std::uint64_t seed = 0;

  /// Columns: n,trials,fraction,ci_low,ci_high,bound_raw,bound_clamped,lemma_gate_ok
  std::string to_csv() const;
};

/// For each n: samples `trials_per_n` unit-disk frameworks (per-trial derived
/// seeds), applies the sufficient condition, and aggregates certified
/// fractions with 95% Wilson intervals next to the theoretical bound.
McReport monte_carlo_nonconvexity(const UnitDiskCase& c, const LossSpec& spec,
                                  const std::vector<int>& n_list,
                                  int trials_per_n, std::uint64_t seed,
                                  double eps = 0.5);

/// The sufficient condition under the directly augmented loss (ambient
/// dimension n + d unless overridden). Validity coincides with the plain
/// d-dimensional certificate; both paths are evaluated genuinely.
Certificate augmented_nonconvexity(const Framework& fw, const LossSpec& base,
                                   int aug_dim = -1);

/// The 2d-dimensional connecting path between configurations p and q:
///   p_i(t) = ((p_i+q_i)/2 + cos(pi t)(p_i-q_i)/2,  sin(pi t)(p_i-q_i)/2).
/// Endpoints are (p, 0) and (q, 0); every sensor-sensor and anchor-sensor
/// distance is constant along the path whenever p and q agree on edge lengths.
SensorConfig lift_path(const SensorConfig& p_cfg, const SensorConfig& q_cfg,
                       int dim, double t);

/// Checks the path theorem on a problem: both configs must solve it (loss 0
/// at b=2, c=1 within `solution_tol`; throws otherwise), then returns the
/// maximum edge-length deviation over `samples` points of the lifted path.
double verify_path_isometry(const SnlProblem& p, const SensorConfig& p_cfg,
                            const SensorConfig& q_cfg, int samples,
                            double solution_tol = 1e-8);

struct LandscapeGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  Eigen::MatrixXd values;  // values(iy, ix)

  /// Long-format CSV, header "x,y,loss", y-major row order.
  std::string to_csv() const;

  /// Interior cells whose value is <= all 8 neighbours.
  std::vector<std::pair<int, int>> local_minima() const;  // (ix, iy)
};

/// Loss over a 2-D window of one sensor's position, all other sensors fixed
/// at `fixed` (a full config in the problem dimension). 2-D problems only.
LandscapeGrid landscape_grid(const SnlProblem& p, const LossSpec& spec,
                             int sensor_index, const Rect& window, int res_x,
                             int res_y, const SensorConfig& fixed);

std::string certificate_to_json(const Certificate& cert);

}  // namespace snl
