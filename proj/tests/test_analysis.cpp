#include <doctest.h>

#include <cmath>

#include "snl/analysis.hpp"
#include "test_util.hpp"

using namespace snl;

TEST_SUITE_BEGIN("analysis");

namespace {

const LossSpec kB2C1{2.0, 1.0, 0};

// Independent log-space oracle for the probability bound, long double
// throughout and the binomial from lgammal directly.
long double bound_oracle(long long n, long double p) {
  const long long v = static_cast<long long>(std::floor(std::sqrt((long double)n)));
  const long double lt = std::log((long double)n) + std::log((long double)v) +
                         std::lgamma((long double)n) - std::lgamma((long double)v) -
                         std::lgamma((long double)(n - v + 1)) +
                         (long double)(n - v) * std::log1p(-p);
  return 1.0L - std::exp(lt);
}

}  // namespace

TEST_CASE("sufficient condition on hand-checkable configurations") {
  SUBCASE("no sensor-sensor edges means no certificate") {
    const auto cert = check_sufficient_condition(example_three_anchor_one_sensor(), kB2C1);
    CHECK(cert.lhs == 0.0);
    CHECK_FALSE(cert.valid());
  }
  SUBCASE("one sensor-sensor edge, empty anchor sum") {
    Framework fw;
    fw.dim = 2;
    fw.anchors = {};
    fw.sensors = {Eigen::Vector2d(0.4, 0), Eigen::Vector2d(-0.4, 0)};
    fw.topology = Topology(2, 0);
    fw.topology.add_ss(0, 1);
    const auto cert = check_sufficient_condition(fw, kB2C1);
    CHECK(cert.lhs == doctest::Approx(1.28).epsilon(1e-14));  // 2 * 0.8^2
    CHECK(cert.rhs == 0.0);
    CHECK(cert.valid());
    CHECK(cert.witness_verified);
  }
}

TEST_CASE("positive certificates always verify through the loss itself") {
  int valid_count = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto fw = sample_unit_disk(test::unit_square_case(200, 0.35),
                                     Rng::mix(3, 200, trial));
    const auto cert = check_sufficient_condition(fw, kB2C1);
    // The certificate inequality must agree with a direct midpoint check.
    const auto p = problem_from_framework(fw);
    const SensorConfig s = config_from_positions(fw.sensors, 2);
    const double direct_lhs = 2.0 * loss_eval(p, kB2C1, SensorConfig::Zero(s.size()));
    const double direct_rhs = loss_eval(p, kB2C1, s) + loss_eval(p, kB2C1, -s);
    if (cert.valid()) {
      ++valid_count;
      CHECK(cert.witness_verified);
      CHECK(direct_lhs > direct_rhs);
      CHECK(cert.midpoint_lhs == doctest::Approx(direct_lhs));
      CHECK(cert.midpoint_rhs == doctest::Approx(direct_rhs));
    }
  }
  CHECK(valid_count > 0);  // at n=200 the condition fires essentially always
}

TEST_CASE("segment scan and midpoint checks on the radius example") {
  SUBCASE("F0 (four edges) shows no violation over many segments") {
    const auto p = problem_from_framework(example_radius(1.0, 1.99, 1.995));
    const auto hit = segment_convexity_scan(p, kB2C1, Rect::cube(4, -3.0, 3.0),
                                            2000, 17, 42);
    CHECK_FALSE(hit.has_value());
  }
  SUBCASE("F (five edges) violates convexity at the paper's triple") {
    const auto p = problem_from_framework(example_radius(1.0, 1.99, 2.5));
    const double e = 1.0, h = 1.99;
    SensorConfig x0(4), x1(4);
    x0 << -e, h, e, h;
    x1 << e, h, -e, h;
    const auto cert = check_segment_midpoint(p, kB2C1, x0, x1);
    CHECK(cert.valid());
    // 2F(0,h,0,h) > F(-e,h,e,h) + F(e,h,-e,h)
    SensorConfig mid(4);
    mid << 0, h, 0, h;
    CHECK(cert.lhs == doctest::Approx(2.0 * loss_eval(p, kB2C1, mid)));
    CHECK(cert.rhs ==
          doctest::Approx(loss_eval(p, kB2C1, x0) + loss_eval(p, kB2C1, x1)));
  }
  SUBCASE("zero-edge problems are convex (affine) and never flagged") {
    Framework fw;
    fw.dim = 2;
    fw.anchors = {Eigen::Vector2d(0, 0)};
    fw.sensors = {Eigen::Vector2d(1, 1)};
    fw.topology = Topology(1, 1);
    const auto p = problem_from_framework(fw);
    const auto hit =
        segment_convexity_scan(p, kB2C1, Rect::cube(2, -2.0, 2.0), 500, 9, 7);
    CHECK_FALSE(hit.has_value());
  }
}

TEST_CASE("p_r for rectangles") {
  const Rect sq = Rect::unit_square();
  SUBCASE("corner formula values") {
    // (3 pi / 16) r^2 at eps = 0.5.
    CHECK(p_r_for_rectangle(sq, 0.3) ==
          doctest::Approx(3.0 * M_PI / 16.0 * 0.09).epsilon(1e-12));
    CHECK(p_r_for_rectangle(sq, 0.1) ==
          doctest::Approx(3.0 * M_PI / 16.0 * 0.01).epsilon(1e-12));
  }
  SUBCASE("empty annulus as eps -> 1") {
    CHECK(p_r_for_rectangle(sq, 0.3, 0.999999) ==
          doctest::Approx(0.0).epsilon(1e-5));
    CHECK_THROWS(p_r_for_rectangle(sq, 0.3, 1.0));
  }
  SUBCASE("radius beyond the shortest side is rejected") {
    CHECK_THROWS(p_r_for_rectangle(sq, 1.01));
  }
  SUBCASE("Monte Carlo oracle agrees") {
    // Estimate min over positions of P(||s'-x|| in [r/2, r]) by sampling
    // a coarse position grid with many uniform draws each.
    const double r = 0.3;
    double worst = 1.0;
    for (int gx = 0; gx <= 10; ++gx) {
      for (int gy = 0; gy <= 10; ++gy) {
        const Eigen::Vector2d pos(gx / 10.0, gy / 10.0);
        Rng rng(Rng::mix(55, gx, gy));
        int hits = 0;
        const int draws = 200000;
        for (int k = 0; k < draws; ++k) {
          const Eigen::Vector2d s(rng.uniform01(), rng.uniform01());
          const double d = (s - pos).norm();
          if (d >= 0.5 * r && d <= r) ++hits;
        }
        worst = std::min(worst, static_cast<double>(hits) / draws);
      }
    }
    CHECK(p_r_for_rectangle(sq, r) == doctest::Approx(worst).epsilon(0.05));
    // The grid fallback agrees with the closed form where both apply.
    CHECK(p_r_grid(sq, r, 0.5, 60) ==
          doctest::Approx(p_r_for_rectangle(sq, r)).epsilon(1e-3));
  }
  SUBCASE("grid fallback sees the vacuous complete-graph regime") {
    // eps=0.5 with r past the diagonal: the annulus misses the center square
    // entirely, so no positive uniform bound exists.
    CHECK(p_r_grid(sq, std::sqrt(2.0) + 0.1, 0.5, 41) == 0.0);
    // A smaller eps restores a positive bound.
    CHECK(p_r_grid(sq, std::sqrt(2.0) + 0.1, 0.35, 41) > 0.01);
  }
}

TEST_CASE("disk-rectangle intersection areas") {
  const Rect sq = Rect::unit_square();
  // Disk fully inside.
  CHECK(disk_rect_area(sq, Eigen::Vector2d(0.5, 0.5), 0.25) ==
        doctest::Approx(M_PI * 0.0625).epsilon(1e-9));
  // Quarter disk at a corner.
  CHECK(disk_rect_area(sq, Eigen::Vector2d(0, 0), 0.5) ==
        doctest::Approx(M_PI * 0.25 / 4.0).epsilon(1e-9));
  // Half disk on an edge.
  CHECK(disk_rect_area(sq, Eigen::Vector2d(0.5, 0), 0.25) ==
        doctest::Approx(M_PI * 0.0625 / 2.0).epsilon(1e-9));
  // Disk covering everything.
  CHECK(disk_rect_area(sq, Eigen::Vector2d(0.5, 0.5), 2.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("theoretical bound values and behavior") {
  SUBCASE("n = 1 is exactly zero") {
    CHECK(theoretical_bound(1, 0.3) == 0.0);
    CHECK(theoretical_bound(1, 0.999) == 0.0);
  }
  SUBCASE("n = 4, p = 0.05 by direct arithmetic") {
    // 1 - 4*2*C(3,1)*0.95^2 = -20.66
    CHECK(theoretical_bound(4, 0.05) == doctest::Approx(-20.66).epsilon(1e-10));
  }
  SUBCASE("log-space evaluation stays finite at huge n") {
    const double b = theoretical_bound(10000, 0.05);
    CHECK(std::isfinite(b));
    // Frozen from the independent long-double oracle: deep in the vacuous
    // regime at this (n, p_r); the crossover sits near n = 1.5e4.
    CHECK(b == doctest::Approx(static_cast<double>(bound_oracle(10000, 0.05L)))
                   .epsilon(1e-9));
    CHECK(b < -1e24);
    CHECK(theoretical_bound(15000, 0.05) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isfinite(theoretical_bound(100000000, 0.05)));
  }
  SUBCASE("agrees with the oracle across the range") {
    for (long long n : {2, 5, 10, 50, 300, 5000, 20000, 1000000}) {
      for (double p : {0.05, 0.1, 0.4}) {
        const long double want = bound_oracle(n, p);
        const double got = theoretical_bound(n, p);
        CHECK(got == doctest::Approx(static_cast<double>(want))
                         .epsilon(1e-8));
      }
    }
  }
  SUBCASE("monotone toward 1 past the crossover") {
    for (double p : {0.05, 0.1, 0.3}) {
      long long n = 10000;
      for (int k = 0; k < 4; ++k) {
        CHECK(theoretical_bound(4 * n, p) >= theoretical_bound(n, p));
        n *= 4;
      }
    }
  }
  SUBCASE("domain checks") {
    CHECK_THROWS(theoretical_bound(0, 0.5));
    CHECK_THROWS(theoretical_bound(10, 0.0));
    CHECK_THROWS(theoretical_bound(10, 1.0));
  }
  SUBCASE("lemma gate") {
    CHECK(lemma_gate(200, 0.072));   // 199 * 0.072 = 14.3 >= 13
    CHECK_FALSE(lemma_gate(25, 0.072));  // 24 * 0.072 = 1.7 < 4
  }
}

TEST_CASE("wilson interval sanity") {
  const auto ci = wilson_interval(50, 100);
  // Hand values for phat=0.5, n=100, z=1.96.
  CHECK(ci.low == doctest::Approx(0.4038315).epsilon(1e-4));
  CHECK(ci.high == doctest::Approx(0.5961685).epsilon(1e-4));
  const auto all = wilson_interval(10, 10);
  CHECK(all.high >= 1.0 - 1e-12);
  CHECK(all.low > 0.6);
  const auto none = wilson_interval(0, 10);
  CHECK(none.low == 0.0);
}

TEST_CASE("monte carlo report") {
  SUBCASE("single sensor cannot certify") {
    auto c = test::unit_square_case(1, 0.35);
    const auto rep = monte_carlo_nonconvexity(c, kB2C1, {1}, 5, 77);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].fraction == 0.0);
  }
  SUBCASE("deterministic per seed and sorted by n") {
    auto c = test::unit_square_case(0, 0.35);
    const auto a = monte_carlo_nonconvexity(c, kB2C1, {50, 10, 25}, 10, 5);
    const auto b = monte_carlo_nonconvexity(c, kB2C1, {10, 25, 50}, 10, 5);
    REQUIRE(a.rows.size() == 3);
    CHECK(a.rows[0].n == 10);
    CHECK(a.rows[1].n == 25);
    CHECK(a.rows[2].n == 50);
    for (size_t i = 0; i < 3; ++i) {
      CHECK(a.rows[i].certified == b.rows[i].certified);
      CHECK(a.rows[i].bound_raw == b.rows[i].bound_raw);
    }
    CHECK(a.rows[0].trials == 10);
  }
  SUBCASE("csv header is stable") {
    auto c = test::unit_square_case(0, 0.35);
    const auto rep = monte_carlo_nonconvexity(c, kB2C1, {5}, 2, 1);
    CHECK(rep.to_csv().rfind(
              "n,trials,fraction,ci_low,ci_high,bound_raw,bound_clamped,"
              "lemma_gate_ok\n",
              0) == 0);
  }
}

TEST_CASE("augmented certificate coincides with the plain one") {
  for (int trial = 0; trial < 25; ++trial) {
    const auto fw = sample_unit_disk(test::unit_square_case(2 + trial % 12, 0.5),
                                     Rng::mix(11, trial));
    const auto plain = check_sufficient_condition(fw, kB2C1);
    const auto aug = augmented_nonconvexity(fw, kB2C1);
    CHECK(plain.valid() == aug.valid());
    CHECK(aug.lhs == doctest::Approx(plain.lhs).epsilon(1e-12));
    CHECK(aug.rhs == doctest::Approx(plain.rhs).epsilon(1e-12));
  }
}

TEST_CASE("lift_path endpoints and algebra") {
  Rng rng(8);
  const int n = 3, d = 2;
  SensorConfig p(n * d), q(n * d);
  for (int k = 0; k < n * d; ++k) {
    p[k] = rng.uniform(-1, 1);
    q[k] = rng.uniform(-1, 1);
  }
  SUBCASE("t = 0 embeds p, t = 1 embeds q") {
    const auto z0 = lift_path(p, q, d, 0.0);
    const auto z1 = lift_path(p, q, d, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) {
        CHECK(std::abs(z0[2 * d * i + k] - p[d * i + k]) <= 1e-15);
        CHECK(std::abs(z0[2 * d * i + d + k]) <= 1e-15);
        CHECK(std::abs(z1[2 * d * i + k] - q[d * i + k]) <= 1e-15);
        CHECK(std::abs(z1[2 * d * i + d + k]) <= 1e-15);
      }
    }
  }
  SUBCASE("t = 1/2 gives midpoint and half-difference") {
    const auto z = lift_path(p, q, d, 0.5);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) {
        CHECK(std::abs(z[2 * d * i + k] - 0.5 * (p[d * i + k] + q[d * i + k])) <= 1e-15);
        CHECK(std::abs(z[2 * d * i + d + k] - 0.5 * (p[d * i + k] - q[d * i + k])) <=
              1e-15);
      }
    }
  }
}

TEST_CASE("path distances are constant for congruent configurations") {
  // Independent of any problem: q is a rigid motion of p, so all pairwise
  // sensor distances match and stay constant along the path.
  Rng rng(14);
  const int n = 4, d = 2;
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i)
    pts.push_back(Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1)));
  std::vector<Eigen::VectorXd> moved;
  for (const auto& v : pts)
    moved.push_back(test::rotate2(v, 1.234, Eigen::Vector2d(0.3, -0.7)));
  const SensorConfig p = config_from_positions(pts, d);
  const SensorConfig q = config_from_positions(moved, d);
  for (int k = 0; k <= 20; ++k) {
    const double t = k / 20.0;
    const auto z = lift_path(p, q, d, t);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double want = (pts[i] - pts[j]).norm();
        const double got =
            (z.segment(2 * d * i, 2 * d) - z.segment(2 * d * j, 2 * d)).norm();
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("verify_path_isometry") {
  // Two colinear anchors; the solution and its mirror across the anchor line.
  Framework fw;
  fw.dim = 2;
  fw.anchors = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)};
  fw.sensors = {Eigen::Vector2d(0.3, 0.7)};
  fw.topology = Topology(1, 2);
  fw.topology.add_as(0, 0);
  fw.topology.add_as(1, 0);
  const auto p = problem_from_framework(fw);
  const SensorConfig sol = config_from_positions(fw.sensors, 2);
  SensorConfig mirror = sol;
  mirror[1] = -mirror[1];

  SUBCASE("degenerate path p = q") {
    CHECK(verify_path_isometry(p, sol, sol, 11) <= 1e-12);
  }
  SUBCASE("mirror pair stays isometric") {
    CHECK(verify_path_isometry(p, sol, mirror, 101) <= 1e-10);
  }
  SUBCASE("non-solutions are rejected") {
    SensorConfig bad = sol;
    bad[0] += 0.2;
    CHECK_THROWS(verify_path_isometry(p, sol, bad, 11));
  }
}

TEST_CASE("landscape grid") {
  SUBCASE("one-anchor minima trace the circle") {
    const auto p = problem_from_framework(example_one_anchor_one_sensor());
    const auto grid = landscape_grid(p, kB2C1, 0, Rect::cube(2, -2.0, 2.0), 201,
                                     201, SensorConfig::Zero(2));
    const auto minima = grid.local_minima();
    CHECK(minima.size() > 20);
    const double cell = 4.0 / 200.0;
    for (const auto& [ix, iy] : minima) {
      const double radius = std::hypot(grid.xs[ix], grid.ys[iy]);
      CHECK(std::abs(radius - 1.0) <= cell * std::sqrt(2.0));
    }
  }
  SUBCASE("three-anchor landscape has exactly the two known basins") {
    const auto p = problem_from_framework(example_three_anchor_one_sensor());
    const auto grid = landscape_grid(p, LossSpec{2.0, 2.0, 0}, 0,
                                     Rect::cube(2, -2.0, 2.0), 161, 161,
                                     SensorConfig::Zero(2));
    const auto minima = grid.local_minima();
    bool has_global = false, has_second = false;
    for (const auto& [ix, iy] : minima) {
      const Eigen::Vector2d at(grid.xs[ix], grid.ys[iy]);
      if ((at - Eigen::Vector2d(0, 1)).norm() < 0.1) has_global = true;
      if (at[1] < -0.2) has_second = true;
    }
    CHECK(has_global);
    CHECK(has_second);
  }
  SUBCASE("zero-edge grid is identically zero") {
    Framework fw;
    fw.dim = 2;
    fw.anchors = {Eigen::Vector2d(0, 0)};
    fw.sensors = {Eigen::Vector2d(1, 1)};
    fw.topology = Topology(1, 1);
    const auto p = problem_from_framework(fw);
    const auto grid = landscape_grid(p, kB2C1, 0, Rect::cube(2, -1.0, 1.0), 11,
                                     11, SensorConfig::Zero(2));
    CHECK(grid.values.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("csv header") {
    const auto p = problem_from_framework(example_one_anchor_one_sensor());
    const auto grid = landscape_grid(p, kB2C1, 0, Rect::cube(2, -1.0, 1.0), 3, 3,
                                     SensorConfig::Zero(2));
    CHECK(grid.to_csv().rfind("x,y,loss\n", 0) == 0);
  }
}

TEST_SUITE_END();
