#include <doctest.h>

#include <cmath>

#include "snl/loss.hpp"
#include "test_util.hpp"

using namespace snl;

TEST_SUITE_BEGIN("loss");

namespace {

SnlProblem three_anchor() {
  return problem_from_framework(example_three_anchor_one_sensor());
}

SnlProblem one_anchor_origin() {
  Framework fw;
  fw.dim = 2;
  fw.anchors = {Eigen::Vector2d(0, 0)};
  fw.sensors = {Eigen::Vector2d(1, 0)};  // distance 1
  fw.topology = Topology(1, 1);
  fw.topology.add_as(0, 0);
  return problem_from_framework(fw);
}

}  // namespace

TEST_CASE("loss values on the 3-anchor example") {
  const auto p = three_anchor();
  const LossSpec spec{2.0, 1.0, 0};
  CHECK(loss_eval(p, spec, Eigen::Vector2d(0, 1)) == doctest::Approx(0.0).epsilon(1e-14));
  // |1-2| + |1-2| + |0.16-0.36| = 2.2 by hand.
  CHECK(loss_eval(p, spec, Eigen::Vector2d(0, 0)) == doctest::Approx(2.2).epsilon(1e-14));
}

TEST_CASE("one-term loss at the anchor") {
  const auto p = one_anchor_origin();
  CHECK(loss_eval(p, LossSpec{2.0, 1.0, 0}, Eigen::Vector2d(0, 0)) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dimension mismatch is rejected") {
  const auto p = three_anchor();
  CHECK_THROWS(loss_eval(p, LossSpec{2.0, 1.0, 0}, Eigen::Vector3d(0, 1, 0)));
  CHECK_THROWS(loss_grad(p, LossSpec{2.0, 2.0, 0}, Eigen::VectorXd::Zero(5)));
  CHECK_THROWS(loss_eval(p, LossSpec{2.0, 1.0, 1}, Eigen::Vector2d(0, 1)));  // D < d
  CHECK_THROWS(loss_eval(p, LossSpec{0.5, 1.0, 0}, Eigen::Vector2d(0, 1)));  // b < 1
}

TEST_CASE("gradient at exact solutions vanishes") {
  const auto p = three_anchor();
  const auto g = loss_grad(p, LossSpec{2.0, 2.0, 0}, Eigen::Vector2d(0, 1));
  CHECK(g.norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("single-edge hand gradient") {
  const auto p = one_anchor_origin();
  const auto g = loss_grad(p, LossSpec{2.0, 2.0, 0}, Eigen::Vector2d(2, 0));
  // 4 (||x||^2 - 1) x = (24, 0).
  CHECK(g[0] == doctest::Approx(24.0).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("analytic gradient matches central differences") {
  const auto p3 = three_anchor();
  const LossSpec smooth{2.0, 2.0, 0};
  SUBCASE("at the origin of the 3-anchor example") {
    const Eigen::Vector2d x(0, 0);
    const auto fd = test::fd_gradient(p3, smooth, x);
    CHECK(test::max_rel_err(loss_grad(p3, smooth, x), fd) <= 1e-6);
  }
  SUBCASE("random 10-sensor problem, several specs") {
    const auto fw = sample_unit_disk(test::unit_square_case(10, 0.6), 21);
    const auto p = problem_from_framework(fw);
    Rng rng(77);
    for (const LossSpec spec : {LossSpec{2.0, 2.0, 0}, LossSpec{3.0, 2.0, 0},
                                LossSpec{2.0, 3.0, 0}}) {
      for (int rep = 0; rep < 20; ++rep) {
        SensorConfig x(20);
        for (int k = 0; k < 20; ++k) x[k] = rng.uniform(-2, 2);
        const auto fd = test::fd_gradient(p, spec, x);
        CHECK(test::max_rel_err(loss_grad(p, spec, x), fd) <= 1e-6);
      }
    }
  }
}

TEST_CASE("loss_along_segment") {
  const auto p = three_anchor();
  const LossSpec spec{2.0, 1.0, 0};
  SUBCASE("degenerate segment is constant") {
    const auto vals =
        loss_along_segment(p, spec, Eigen::Vector2d(0.3, 0.4), Eigen::Vector2d(0.3, 0.4), 5);
    REQUIRE(vals.size() == 5);
    for (const auto& [t, v] : vals) CHECK(v == doctest::Approx(vals[0].second));
  }
  SUBCASE("endpoint values on the mirror segment") {
    const auto vals = loss_along_segment(p, spec, Eigen::Vector2d(0, 1),
                                         Eigen::Vector2d(0, -1), 101);
    REQUIRE(vals.size() == 101);
    CHECK(vals.front().second == doctest::Approx(0.0).epsilon(1e-14));
    // loss((0,-1)) = |2-2| + |2-2| + |1.96-0.36| = 1.6 by hand.
    CHECK(vals.back().second == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(vals.front().first == 0.0);
    CHECK(vals.back().first == 1.0);
  }
  SUBCASE("sample count validated") {
    CHECK_THROWS(loss_along_segment(p, spec, Eigen::Vector2d(0, 1),
                                    Eigen::Vector2d(0, -1), 1));
  }
}

TEST_CASE("loss is nonnegative and zero only at solutions") {
  const auto fw = sample_unit_disk(test::unit_square_case(6, 0.8), 4);
  const auto p = problem_from_framework(fw);
  const SensorConfig truth = config_from_positions(fw.sensors, 2);
  for (const LossSpec spec : {LossSpec{2.0, 1.0, 0}, LossSpec{2.0, 2.0, 0},
                              LossSpec{1.5, 2.5, 0}}) {
    CHECK(loss_eval(p, spec, truth) == doctest::Approx(0.0).epsilon(1e-12));
    Rng rng(9);
    for (int rep = 0; rep < 25; ++rep) {
      SensorConfig x(12);
      for (int k = 0; k < 12; ++k) x[k] = rng.uniform(-2, 2);
      CHECK(loss_eval(p, spec, x) >= 0.0);
    }
  }
}

TEST_CASE("zero-padded configs reproduce the low-dimensional loss") {
  const auto fw = sample_unit_disk(test::unit_square_case(5, 0.7), 11);
  const auto p = problem_from_framework(fw);
  const int n = p.topology.n_sensors();
  const LossSpec plain{2.0, 1.0, 0};
  const LossSpec augmented = LossSpec::augmented(p, 2.0, 1.0);
  const int D = augmented.ambient_dim;
  REQUIRE(D == n + 2);
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    SensorConfig low(2 * n);
    for (int k = 0; k < 2 * n; ++k) low[k] = rng.uniform(-2, 2);
    SensorConfig padded = SensorConfig::Zero(D * n);
    for (int j = 0; j < n; ++j)
      padded.segment(D * j, 2) = low.segment(2 * j, 2);
    CHECK(loss_eval(p, augmented, padded) ==
          doctest::Approx(loss_eval(p, plain, low)).epsilon(1e-13));
  }
}

TEST_CASE("translating sensors and anchors together leaves the loss unchanged") {
  const auto fw = sample_unit_disk(test::unit_square_case(6, 0.7), 13);
  auto p = problem_from_framework(fw);
  const LossSpec spec{2.0, 2.0, 0};
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    SensorConfig x(12);
    for (int k = 0; k < 12; ++k) x[k] = rng.uniform(-1, 2);
    const Eigen::Vector2d shift(rng.uniform(-5, 5), rng.uniform(-5, 5));
    auto moved = p;
    for (auto& a : moved.anchors) a += shift;
    SensorConfig xs = x;
    for (int j = 0; j < 6; ++j) xs.segment(2 * j, 2) += shift;
    CHECK(loss_eval(moved, spec, xs) ==
          doctest::Approx(loss_eval(p, spec, x)).epsilon(1e-12));
  }
}

TEST_SUITE_END();
