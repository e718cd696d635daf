#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "snl/geometry.hpp"

namespace snl {

struct SsEdge {
  int i;  // sensor, i < j
  int j;  // sensor
};

struct AsEdge {
  int anchor;
  int sensor;
};

/// Bipartite-colored graph of sensors and anchors. Sensor-sensor edges are
/// unordered pairs; anchor-sensor edges are (anchor, sensor) pairs. The type
/// cannot express anchor-anchor edges.
class Topology {
 public:
  Topology() = default;
  Topology(int n_sensors, int n_anchors);

  /// Adds {i, j}; normalizes order, rejects self-loops, duplicates, bad indices.
  void add_ss(int i, int j);
  void add_as(int anchor, int sensor);

  int n_sensors() const { return n_sensors_; }
  int n_anchors() const { return n_anchors_; }
  const std::vector<SsEdge>& edges_ss() const { return edges_ss_; }
  const std::vector<AsEdge>& edges_as() const { return edges_as_; }

  bool has_ss(int i, int j) const;
  bool has_as(int anchor, int sensor) const;

  int n_edges() const {
    return static_cast<int>(edges_ss_.size() + edges_as_.size());
  }

 private:
  int n_sensors_ = 0;
  int n_anchors_ = 0;
  std::vector<SsEdge> edges_ss_;
  std::vector<AsEdge> edges_as_;
  std::unordered_set<std::uint64_t> ss_keys_;
  std::unordered_set<std::uint64_t> as_keys_;
};

/// A graph together with an embedding: known anchor positions plus true
/// sensor positions. Every edge length is computable, so a framework
/// generates a unique localization problem.
struct Framework {
  Topology topology;
  int dim = 0;
  std::vector<Eigen::VectorXd> anchors;
  std::vector<Eigen::VectorXd> sensors;

  void validate() const;
};

/// The problem instance: graph, anchor positions, and one given distance per
/// edge. Distances are stored parallel to the topology's edge lists, so each
/// edge has exactly one entry by construction.
struct SnlProblem {
  Topology topology;
  int dim = 0;
  std::vector<Eigen::VectorXd> anchors;
  std::vector<double> dist_ss;  // parallel to topology.edges_ss()
  std::vector<double> dist_as;  // parallel to topology.edges_as()

  void validate() const;
};

/// Random-instance distribution: sensors drawn uniformly on a rectangular
/// region, an edge present iff the Euclidean distance is <= radius.
struct UnitDiskCase {
  Rect region;
  double radius = 0.0;
  int n_sensors = 0;
  std::vector<Eigen::VectorXd> anchors;

  void validate() const;
};

/// Generates the unique problem a framework solves: every topology edge gets
/// its exact Euclidean length.
SnlProblem problem_from_framework(const Framework& fw);

/// Draws sensors i.i.d. uniform on the region and includes every edge (both
/// sensor-sensor and anchor-sensor) with length <= radius. Ties at exactly
/// the radius are included. Deterministic per seed.
Framework sample_unit_disk(const UnitDiskCase& c, std::uint64_t seed);

/// Builds a framework in trilateration order: d+1 well-spread anchors, then
/// sensors placed one at a time, each connected to d+1 previously placed
/// vertices whose affine span is full-dimensional. Instances generated this
/// way are universally rigid, which makes them exact-recovery test cases.
Framework gen_trilateration(int dim, int n_sensors, const Rect& region,
                            std::uint64_t seed);

/// Three anchors (-1,0), (1,0), (0,0.4), one sensor at (0,1), all three
/// anchor edges. Globally rigid, yet its loss has two local minimizers.
Framework example_three_anchor_one_sensor();

/// One anchor at the origin, one sensor at (1,0), a single edge of length 1.
/// The one-term loss whose minimizers form the unit circle.
Framework example_one_anchor_one_sensor();

/// Four anchors (±e, ±h), sensors (-e,0) and (e,0); edges by the unit-disk
/// rule with the given radius. With h < r < 2e only the four short anchor
/// edges appear (the convex loss F0); once r >= 2e the sensor-sensor edge
/// joins in and the loss turns non-convex.
Framework example_radius(double e, double h, double r);

/// Dispatch by name: three_anchor_one_sensor | one_anchor_one_sensor |
/// radius_example (parametrized by e, h, r). Throws on unknown names.
Framework builtin_example(const std::string& name, double e = 1.0,
                          double h = 1.99, double r = 1.995);

/// The four corners of an axis-aligned rectangle, a common anchor layout.
std::vector<Eigen::VectorXd> corner_anchors(const Rect& region);

}  // namespace snl
