#include "seaplan/bezier.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace seaplan;

namespace {

double sampled_max_curvature(const BezierCurve& c, int n) {
  double best = 0.0;
  for (int i = 0; i <= n; ++i) best = std::max(best, std::abs(curvature(c, static_cast<double>(i) / n)));
  return best;
}

std::vector<Vec2> random_points(testing::Rng& rng, int n) {
  std::vector<Vec2> p;
  for (int i = 0; i < n; ++i) p.push_back(rng.point(-10.0, 10.0));
  return p;
}

}  // namespace

TEST_CASE("Bernstein evaluation") {
  const BezierCurve q({{0, 0}, {1, 1}, {2, 0}});
  CHECK((q.evaluate(0.5) - Vec2(1.0, 0.5)).norm() < 1e-15);
  CHECK((q.evaluate(0.0) - Vec2(0, 0)).norm() == 0.0);
  CHECK((q.evaluate(1.0) - Vec2(2, 0)).norm() == 0.0);
  CHECK_THROWS_AS(q.evaluate(1.5), DomainError);
}

TEST_CASE("hodograph agrees with central differences") {
  testing::Rng rng(21);
  for (int deg = 1; deg <= 5; ++deg) {
    const BezierCurve c(random_points(rng, deg + 1));
    const BezierCurve d = c.derivative();
    CHECK(d.degree() == deg - 1);
    for (int i = 0; i < 20; ++i) {
      const double t = rng.uniform(0.01, 0.99);
      const double h = 1e-6;
      const Vec2 fd = (c.evaluate(t + h) - c.evaluate(t - h)) / (2 * h);
      CHECK((fd - d.evaluate(t)).norm() <= 1e-6 * (1.0 + fd.norm()));
    }
  }
}

TEST_CASE("curvature") {
  const BezierCurve q({{1, 0}, {1, 1}, {0, 1}});
  CHECK(curvature(q, 0.0) == doctest::Approx(0.5));
  CHECK(curvature(BezierCurve({{1, 0}, {1, -1}, {0, -1}}), 0.0) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(curvature(BezierCurve({{1, 1}, {1, 1}, {1, 1}}), 0.3), DegenerateTangent);
  const double k = max_abs_curvature(q);
  CHECK(std::abs(k - sampled_max_curvature(q, 100000)) <= 1e-4);
  CHECK(std::abs(curvature(q, 0.5)) == doctest::Approx(k).epsilon(1e-9));
}

TEST_CASE("max curvature of random curves matches dense sampling") {
  testing::Rng rng(23);
  for (int deg = 2; deg <= 4; ++deg) {
    for (int i = 0; i < 10; ++i) {
      const BezierCurve c(random_points(rng, deg + 1));
      const double sampled = sampled_max_curvature(c, 20000);
      CHECK(max_abs_curvature(c) >= sampled * (1.0 - 1e-3));
    }
  }
}

TEST_CASE("arc length of a straight cubic and a circle-like quadratic") {
  const BezierCurve line({{0, 0}, {1, 0}, {3, 0}, {4, 0}});
  CHECK(arc_length(line) == doctest::Approx(4.0).epsilon(1e-10));
  const BezierCurve q({{0, 0}, {1, 1}, {2, 0}});
  const double oracle = testing::integrate([&](double t) { return q.derivative().evaluate(t).norm(); }, 0, 1, 400);
  CHECK(arc_length(q) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("cubic degree reduction identities") {
  testing::Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const auto v = random_points(rng, 4);
    const std::array<Vec2, 4> p{v[0], v[1], v[2], v[3]};
    const BezierCurve d(v);
    const auto [e, f] = cubic_to_quadratics(p);
    CHECK((e.evaluate(1.0) - f.evaluate(0.0)).norm() < 1e-12);
    CHECK((e.evaluate(1.0) - d.evaluate(0.5)).norm() < 1e-12);
    CHECK((e.front() - p[0]).norm() == 0.0);
    CHECK((f.back() - p[3]).norm() == 0.0);
    // rows summing to one: a common shift moves every output point by it
    const Vec2 s = rng.point(-100, 100);
    const auto [es, fs] = cubic_to_quadratics({p[0] + s, p[1] + s, p[2] + s, p[3] + s});
    for (int k = 0; k < 3; ++k) {
      CHECK((es.control_points()[k] - e.control_points()[k] - s).norm() < 1e-10);
      CHECK((fs.control_points()[k] - f.control_points()[k] - s).norm() < 1e-10);
    }
  }
}

TEST_CASE("quartic degree reduction identities") {
  testing::Rng rng(37);
  for (int i = 0; i < 100; ++i) {
    const auto v = random_points(rng, 5);
    const std::array<Vec2, 5> p{v[0], v[1], v[2], v[3], v[4]};
    const BezierCurve d(v);
    const auto [e, f] = quartic_to_cubics(p);
    CHECK((e.evaluate(1.0) - f.evaluate(0.0)).norm() < 1e-12);
    CHECK((e.evaluate(1.0) - d.evaluate(0.5)).norm() < 1e-12);
    const Vec2 s = rng.point(-100, 100);
    const auto [es, fs] = quartic_to_cubics({p[0] + s, p[1] + s, p[2] + s, p[3] + s, p[4] + s});
    for (int k = 0; k < 4; ++k) {
      CHECK((es.control_points()[k] - e.control_points()[k] - s).norm() < 1e-10);
      CHECK((fs.control_points()[k] - f.control_points()[k] - s).norm() < 1e-10);
    }
  }
}

TEST_CASE("reduced curves reproduce a degree-elevated curve exactly") {
  // a quadratic written as a cubic reduces to its own halves
  const Vec2 a(0, 0), b(2, 3), c(5, -1);
  const std::array<Vec2, 4> cubic{a, (a + 2 * b) / 3, (2 * b + c) / 3, c};
  const BezierCurve q({a, b, c});
  const auto [e, f] = cubic_to_quadratics(cubic);
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    CHECK((e.evaluate(t) - q.evaluate(0.5 * t)).norm() < 1e-12);
    CHECK((f.evaluate(t) - q.evaluate(0.5 + 0.5 * t)).norm() < 1e-12);
  }
}

TEST_CASE("optimal quadratic third point matches a brute-force scan") {
  testing::Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    const Vec2 p0 = rng.point(-5, 5);
    const double alpha = rng.uniform(0.5, 5.0);
    const double heading = rng.uniform(-kPi, kPi);
    const Vec2 p1 = p0 + alpha * Vec2(std::cos(heading), std::sin(heading));
    // keep away from straight continuation, where every length is optimal
    const double turn = rng.uniform(0.3, kPi - 1e-3) * (rng.uniform(0, 1) < 0.5 ? -1 : 1);
    const double beta = rng.uniform(0.5, 10.0);
    const Vec2 dir(std::cos(heading + turn), std::sin(heading + turn));
    const Vec2 ray_end = p1 + beta * dir;
    const double got = (opt_quad1(p0, p1, ray_end) - p1).norm();
    double best_len = 0.0;
    double best_k = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 10000; ++j) {
      const double len = beta * j / 10000.0;
      const double k = max_abs_curvature(BezierCurve({p0, p1, p1 + len * dir}));
      if (k < best_k) {
        best_k = k;
        best_len = len;
      }
    }
    CHECK(std::abs(got - best_len) <= 1e-3 * alpha);
  }
  CHECK(opt_quad1_length(1.5, 10.0, kPi) == doctest::Approx(3.0));
  CHECK(opt_quad1_length(1.5, 2.0, kPi) == doctest::Approx(2.0));
  CHECK(opt_quad1_length(1.0, 10.0, kPi / 2) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(opt_quad1({0, 0}, {0, 0}, {1, 0}), DegenerateInput);
}

TEST_CASE("cubic placement is no worse than a grid search") {
  testing::Rng rng(43);
  for (int i = 0; i < 5; ++i) {
    const Vec2 p0(0, 0);
    std::array<Locus, 3> loci{Locus{rng.point(0.5, 2), rng.point(2, 4)}, Locus{rng.point(3, 5), rng.point(5, 7)},
                              Locus::point(rng.point(7, 9))};
    ControlPointSearch search;
    const auto q = opt_cubic(p0, loci, search);
    const double got = cubic_objective(p0, q);
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 50; ++a) {
      for (int b = 0; b <= 50; ++b) {
        const double ta = std::max(search.t_min, a / 50.0);
        const double tb = std::max(search.t_min, b / 50.0);
        best = std::min(best, cubic_objective(p0, {loci[0].at(ta), loci[1].at(tb), loci[2].at(0.0)}));
      }
    }
    CHECK(got <= best + 1e-3 * std::max(1.0, best));
  }
}

TEST_CASE("hull margin and the farthest clear point") {
  const std::vector<Obstacle> obs{{{5.0, 2.0}, 0.15}};
  const std::vector<Vec2> base{{0, 0}, {4, 0}};
  CHECK(hull_margin(base, obs, 0.77) == doctest::Approx(std::sqrt(5.0) - 0.15 - 0.77));
  const double t = farthest_clear(base, {4, 0}, {10, 0}, obs, 0.77);
  // scan oracle along the segment
  double scan = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double s = i / 10000.0;
    std::vector<Vec2> pts = base;
    pts.push_back(Vec2(4, 0) + s * Vec2(6, 0));
    if (hull_clear(pts, obs, 0.77)) scan = s;
    else break;
  }
  CHECK(std::abs(t - scan) * 6.0 <= 1e-3);
}

TEST_CASE("join angles of a piecewise curve") {
  PiecewiseBezier pw;
  pw.curves.emplace_back(std::vector<Vec2>{{0, 0}, {1, 0}, {2, 0}});
  pw.curves.emplace_back(std::vector<Vec2>{{2, 0}, {3, 0}, {3, 1}});
  pw.curves.emplace_back(std::vector<Vec2>{{3, 1}, {3, 2}, {2, 2}});
  pw.joins = {Continuity::G1, Continuity::G0};
  const auto a = join_angles(pw);
  REQUIRE(a.size() == 2);
  CHECK(a[0] < 1e-12);
  CHECK(a[1] < 1e-12);
  CHECK(pw.length() > 4.0);
}
