#include "snl/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace snl {

namespace {

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

void check_index(int v, int n, const char* what) {
  if (v < 0 || v >= n)
    throw std::out_of_range(std::string(what) + " index out of range");
}

}  // namespace

Topology::Topology(int n_sensors, int n_anchors)
    : n_sensors_(n_sensors), n_anchors_(n_anchors) {
  if (n_sensors < 0 || n_anchors < 0)
    throw std::invalid_argument("Topology: negative node count");
}

void Topology::add_ss(int i, int j) {
  check_index(i, n_sensors_, "sensor");
  check_index(j, n_sensors_, "sensor");
  if (i == j) throw std::invalid_argument("Topology: self-loop");
  if (i > j) std::swap(i, j);
  if (!ss_keys_.insert(pair_key(i, j)).second)
    throw std::invalid_argument("Topology: duplicate sensor-sensor edge");
  edges_ss_.push_back({i, j});
}

void Topology::add_as(int anchor, int sensor) {
  check_index(anchor, n_anchors_, "anchor");
  check_index(sensor, n_sensors_, "sensor");
  if (!as_keys_.insert(pair_key(anchor, sensor)).second)
    throw std::invalid_argument("Topology: duplicate anchor-sensor edge");
  edges_as_.push_back({anchor, sensor});
}

bool Topology::has_ss(int i, int j) const {
  if (i > j) std::swap(i, j);
  return ss_keys_.count(pair_key(i, j)) > 0;
}

bool Topology::has_as(int anchor, int sensor) const {
  return as_keys_.count(pair_key(anchor, sensor)) > 0;
}

void Framework::validate() const {
  if (dim <= 0) throw std::invalid_argument("Framework: dim must be positive");
  if (static_cast<int>(anchors.size()) != topology.n_anchors())
    throw std::invalid_argument("Framework: anchor count mismatch");
  if (static_cast<int>(sensors.size()) != topology.n_sensors())
    throw std::invalid_argument("Framework: sensor count mismatch");
  for (const auto& a : anchors)
    if (a.size() != dim) throw std::invalid_argument("Framework: anchor dim");
  for (const auto& s : sensors)
    if (s.size() != dim) throw std::invalid_argument("Framework: sensor dim");
}

void SnlProblem::validate() const {
  if (dim <= 0) throw std::invalid_argument("SnlProblem: dim must be positive");
  if (static_cast<int>(anchors.size()) != topology.n_anchors())
    throw std::invalid_argument("SnlProblem: anchor count mismatch");
  for (const auto& a : anchors)
    if (a.size() != dim) throw std::invalid_argument("SnlProblem: anchor dim");
  if (dist_ss.size() != topology.edges_ss().size() ||
      dist_as.size() != topology.edges_as().size())
    throw std::invalid_argument("SnlProblem: one distance per edge required");
  for (double d : dist_ss)
    if (!(d > 0)) throw std::invalid_argument("SnlProblem: nonpositive distance");
  for (double d : dist_as)
    if (!(d > 0)) throw std::invalid_argument("SnlProblem: nonpositive distance");
}

void UnitDiskCase::validate() const {
  region.validate();
  if (!(radius > 0)) throw std::invalid_argument("UnitDiskCase: radius must be positive");
  if (n_sensors < 0) throw std::invalid_argument("UnitDiskCase: negative sensor count");
  for (const auto& a : anchors) {
    if (a.size() != region.dim())
      throw std::invalid_argument("UnitDiskCase: anchor dim mismatch");
    if (!region.contains(a))
      throw std::invalid_argument("UnitDiskCase: anchor outside region");
  }
}

SnlProblem problem_from_framework(const Framework& fw) {
  fw.validate();
  SnlProblem p;
  p.topology = fw.topology;
  p.dim = fw.dim;
  p.anchors = fw.anchors;
  p.dist_ss.reserve(fw.topology.edges_ss().size());
  for (const auto& e : fw.topology.edges_ss())
    p.dist_ss.push_back((fw.sensors[e.i] - fw.sensors[e.j]).norm());
  p.dist_as.reserve(fw.topology.edges_as().size());
  for (const auto& e : fw.topology.edges_as())
    p.dist_as.push_back((fw.anchors[e.anchor] - fw.sensors[e.sensor]).norm());
  return p;
}

Framework sample_unit_disk(const UnitDiskCase& c, std::uint64_t seed) {
  c.validate();
  Rng rng(seed);
  Framework fw;
  fw.dim = c.region.dim();
  fw.anchors = c.anchors;
  fw.sensors.reserve(c.n_sensors);
  for (int i = 0; i < c.n_sensors; ++i) fw.sensors.push_back(c.region.sample(rng));
  fw.topology = Topology(c.n_sensors, static_cast<int>(c.anchors.size()));
  for (int i = 0; i < c.n_sensors; ++i)
    for (int j = i + 1; j < c.n_sensors; ++j)
      if ((fw.sensors[i] - fw.sensors[j]).norm() <= c.radius)
        fw.topology.add_ss(i, j);
  for (int a = 0; a < static_cast<int>(c.anchors.size()); ++a)
    for (int j = 0; j < c.n_sensors; ++j)
      if ((c.anchors[a] - fw.sensors[j]).norm() <= c.radius)
        fw.topology.add_as(a, j);
  return fw;
}

namespace {

// Smallest singular value of the reference set's centered coordinate matrix,
// i.e. how far the d+1 points are from lying on a (d-1)-flat.
double spread_thickness(const std::vector<Eigen::VectorXd>& pts) {
  const int d = static_cast<int>(pts[0].size());
  const int k = static_cast<int>(pts.size());
  Eigen::MatrixXd m(d, k - 1);
  for (int i = 1; i < k; ++i) m.col(i - 1) = pts[i] - pts[0];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().minCoeff();
}

// Greedy farthest-point subset of size k among candidates, starting from the
// candidate nearest to `near`.
std::vector<int> spread_subset(const std::vector<Eigen::VectorXd>& pts,
                               const Eigen::VectorXd& near, int k) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> chosen;
  int first = 0;
  double best = (pts[0] - near).squaredNorm();
  for (int i = 1; i < n; ++i) {
    const double d2 = (pts[i] - near).squaredNorm();
    if (d2 < best) {
      best = d2;
      first = i;
    }
  }
  chosen.push_back(first);
  std::vector<double> min_d2(n, 0.0);
  for (int i = 0; i < n; ++i) min_d2[i] = (pts[i] - pts[first]).squaredNorm();
  while (static_cast<int>(chosen.size()) < k) {
    int arg = -1;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      if (min_d2[i] > far) {
        far = min_d2[i];
        arg = i;
      }
    }
    chosen.push_back(arg);
    for (int i = 0; i < n; ++i)
      min_d2[i] = std::min(min_d2[i], (pts[i] - pts[arg]).squaredNorm());
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

Framework gen_trilateration(int dim, int n_sensors, const Rect& region,
                            std::uint64_t seed) {
  region.validate();
  if (region.dim() != dim)
    throw std::invalid_argument("gen_trilateration: region dim mismatch");
  if (dim < 1 || n_sensors < 0)
    throw std::invalid_argument("gen_trilateration: bad parameters");

  Rng rng(seed);
  const int n_refs = dim + 1;
  const double min_side = region.min_side();

  // Anchors: d+1 points in general position, rejection-sampled until the
  // simplex they span is reasonably thick.
  std::vector<Eigen::VectorXd> anchors;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    anchors.clear();
    for (int i = 0; i < n_refs; ++i) anchors.push_back(region.sample(rng));
    if (spread_thickness(anchors) >= 0.2 * min_side) break;
    if (attempt == 999)
      throw std::runtime_error("gen_trilateration: could not place anchors");
  }

  Framework fw;
  fw.dim = dim;
  fw.anchors = anchors;
  fw.topology = Topology(n_sensors, n_refs);

  // placed[k]: position of vertex k in placement order (anchors first).
  // Vertex ids: 0..d are anchors, d+1+i is sensor i.
  std::vector<Eigen::VectorXd> placed = anchors;
  struct Ref {
    bool is_anchor;
    int index;
  };
  std::vector<Ref> ref_of;  // parallel to placed
  for (int a = 0; a < n_refs; ++a) ref_of.push_back({true, a});

  for (int s = 0; s < n_sensors; ++s) {
    Eigen::VectorXd pos;
    std::vector<int> refs;
    bool ok = false;
    for (int attempt = 0; attempt < 500 && !ok; ++attempt) {
      pos = region.sample(rng);
      // Prefer the nearest predecessors; fall back to a spread subset when
      // they are close to degenerate.
      std::vector<int> order(placed.size());
      for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = (placed[a] - pos).squaredNorm();
        const double db = (placed[b] - pos).squaredNorm();
        if (da != db) return da < db;
        return a < b;
      });
      refs.assign(order.begin(), order.begin() + n_refs);
      std::vector<Eigen::VectorXd> ref_pts;
      for (int k : refs) ref_pts.push_back(placed[k]);
      if (spread_thickness(ref_pts) < 0.05 * min_side) {
        refs = spread_subset(placed, pos, n_refs);
        ref_pts.clear();
        for (int k : refs) ref_pts.push_back(placed[k]);
        if (spread_thickness(ref_pts) < 0.05 * min_side) continue;
      }
      ok = true;
    }
    if (!ok)
      throw std::runtime_error("gen_trilateration: could not place sensor");
    for (int k : refs) {
      if (ref_of[k].is_anchor)
        fw.topology.add_as(ref_of[k].index, s);
      else
        fw.topology.add_ss(ref_of[k].index, s);
    }
    fw.sensors.push_back(pos);
    placed.push_back(pos);
    ref_of.push_back({false, s});
  }
  return fw;
}

Framework example_three_anchor_one_sensor() {
  Framework fw;
  fw.dim = 2;
  fw.anchors = {Eigen::Vector2d(-1.0, 0.0), Eigen::Vector2d(1.0, 0.0),
                Eigen::Vector2d(0.0, 0.4)};
  fw.sensors = {Eigen::Vector2d(0.0, 1.0)};
  fw.topology = Topology(1, 3);
  fw.topology.add_as(0, 0);
  fw.topology.add_as(1, 0);
  fw.topology.add_as(2, 0);
  return fw;
}

Framework example_one_anchor_one_sensor() {
  Framework fw;
  fw.dim = 2;
  fw.anchors = {Eigen::Vector2d(0.0, 0.0)};
  fw.sensors = {Eigen::Vector2d(1.0, 0.0)};
  fw.topology = Topology(1, 1);
  fw.topology.add_as(0, 0);
  return fw;
}

Framework example_radius(double e, double h, double r) {
  if (!(e > 0) || !(h > 0) || !(r > 0))
    throw std::invalid_argument("example_radius: e, h, r must be positive");
  Framework fw;
  fw.dim = 2;
  fw.anchors = {Eigen::Vector2d(-e, h), Eigen::Vector2d(-e, -h),
                Eigen::Vector2d(e, h), Eigen::Vector2d(e, -h)};
  fw.sensors = {Eigen::Vector2d(-e, 0.0), Eigen::Vector2d(e, 0.0)};
  fw.topology = Topology(2, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = i + 1; j < 2; ++j)
      if ((fw.sensors[i] - fw.sensors[j]).norm() <= r) fw.topology.add_ss(i, j);
  for (int a = 0; a < 4; ++a)
    for (int j = 0; j < 2; ++j)
      if ((fw.anchors[a] - fw.sensors[j]).norm() <= r) fw.topology.add_as(a, j);
  return fw;
}

Framework builtin_example(const std::string& name, double e, double h, double r) {
  if (name == "three_anchor_one_sensor") return example_three_anchor_one_sensor();
  if (name == "one_anchor_one_sensor") return example_one_anchor_one_sensor();
  if (name == "radius_example") return example_radius(e, h, r);
  throw std::invalid_argument("unknown builtin example: " + name);
}

std::vector<Eigen::VectorXd> corner_anchors(const Rect& region) {
  region.validate();
  if (region.dim() != 2)
    throw std::invalid_argument("corner_anchors: 2-D regions only");
  return {Eigen::Vector2d(region.lo[0], region.lo[1]),
          Eigen::Vector2d(region.hi[0], region.lo[1]),
          Eigen::Vector2d(region.lo[0], region.hi[1]),
          Eigen::Vector2d(region.hi[0], region.hi[1])};
}

}  // namespace snl
