#include "seaplan/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace seaplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

Vec2 de_casteljau(std::vector<Vec2> pts, double t) {
  for (std::size_t n = pts.size(); n > 1; --n) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      pts[i] = (1.0 - t) * pts[i] + t * pts[i + 1];
    }
  }
  return pts.front();
}

// max |kappa| of the quadratic (p0, p1, p2). The cross product of its first
// and second derivatives is constant, so the maximum sits where |P'| is
// smallest.
double quadratic_max_curvature(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const Vec2 a = 2.0 * (p1 - p0);
  const Vec2 b = 2.0 * (p2 - 2.0 * p1 + p0);
  const double cr = std::abs(cross(a, b));
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  if (cr <= 1e-14 * scale * scale) {
    if ((p2 - p0).norm() <= 1e-12 && a.norm() <= 1e-12) {
      throw DegenerateTangent("quadratic collapsed to a point");
    }
    return 0.0;
  }
  double t = 0.0;
  const double bb = b.squaredNorm();
  if (bb > 0.0) t = std::clamp(-a.dot(b) / bb, 0.0, 1.0);
  const double speed = (a + t * b).norm();
  if (speed <= 1e-9) throw DegenerateTangent("quadratic has a cusp");
  return cr / (speed * speed * speed);
}

double curvature_from(const BezierCurve& d1, const BezierCurve& d2, double t) {
  const Vec2 v = d1.evaluate_unchecked(t);
  const double sp = v.norm();
  if (sp <= 1e-9) throw DegenerateTangent("vanishing tangent");
  const Vec2 a = d2.degree() >= 0 ? d2.evaluate_unchecked(t) : Vec2(0.0, 0.0);
  return cross(v, a) / (sp * sp * sp);
}

template <std::size_t K>
using Points = std::array<Vec2, K>;

// Coordinate-descent golden-section search over the locus parameters, with a
// coarse grid start and a compass-search finish. Feasibility along each locus
// is monotone because every locus starts inside the hull of the other points.
template <std::size_t K>
Points<K> search_loci(const Vec2& p0, const std::array<Locus, K>& loci,
                      const std::function<double(const Points<K>&)>& objective,
                      const ControlPointSearch& search) {
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < K; ++i) {
    if (!loci[i].fixed()) free_idx.push_back(i);
  }
  auto place = [&](const std::array<double, K>& t) {
    Points<K> q;
    for (std::size_t i = 0; i < K; ++i) q[i] = loci[i].fixed() ? loci[i].from : loci[i].at(t[i]);
    return q;
  };
  auto feasible = [&](const Points<K>& q) {
    std::array<Vec2, K + 1> all;
    all[0] = p0;
    std::copy(q.begin(), q.end(), all.begin() + 1);
    return hull_clear(all, search.obstacles, search.clearance);
  };
  auto value = [&](const std::array<double, K>& t) {
    const Points<K> q = place(t);
    if (!feasible(q)) return kInf;
    return objective(q);
  };

  std::array<double, K> t{};
  t.fill(1.0);
  if (free_idx.empty()) {
    const Points<K> q = place(t);
    if (!feasible(q)) throw NoFeasiblePoint("fixed control points collide");
    return q;
  }

  double t_min = search.t_min;
  const std::size_t nf = free_idx.size();
  const int grid = nf == 1 ? 41 : nf == 2 ? 17 : nf == 3 ? 12 : 7;

  double best = kInf;
  std::array<double, K> best_t = t;
  bool any_feasible = false;
  for (int attempt = 0; attempt < 4 && !any_feasible; ++attempt) {
    std::vector<int> idx(nf, 0);
    while (true) {
      std::array<double, K> trial = t;
      for (std::size_t j = 0; j < nf; ++j) {
        trial[free_idx[j]] = t_min + (1.0 - t_min) * idx[j] / (grid - 1);
      }
      const Points<K> q = place(trial);
      if (feasible(q)) {
        const double v = objective(q);
        if (!any_feasible || v < best) {
          best = v;
          best_t = trial;
        }
        any_feasible = true;
      }
      std::size_t j = 0;
      while (j < nf && ++idx[j] == grid) idx[j++] = 0;
      if (j == nf) break;
    }
    if (!any_feasible) {
      std::array<double, K> low = t;
      for (std::size_t i : free_idx) low[i] = t_min;
      if (feasible(place(low))) {
        any_feasible = true;
        best_t = low;
        best = objective(place(low));
        break;
      }
      t_min *= 1e-2;
    }
  }
  if (!any_feasible) throw NoFeasiblePoint("every candidate hull collides");
  t = best_t;

  for (int sweep = 0; sweep < 60; ++sweep) {
    double moved = 0.0;
    for (std::size_t i : free_idx) {
      const double len = (loci[i].to - loci[i].from).norm();
      // feasible interval [t_min, hi]
      double hi = 1.0;
      {
        std::array<double, K> probe = t;
        probe[i] = 1.0;
        if (!feasible(place(probe))) {
          double lo = t[i];
          hi = 1.0;
          while ((hi - lo) * len > 1e-9) {
            probe[i] = 0.5 * (lo + hi);
            (feasible(place(probe)) ? lo : hi) = probe[i];
          }
          hi = lo;
        }
      }
      auto f1 = [&](double s) {
        std::array<double, K> probe = t;
        probe[i] = s;
        return value(probe);
      };
      double a = t_min;
      double b = hi;
      double x1 = b - kGolden * (b - a);
      double x2 = a + kGolden * (b - a);
      double f_x1 = f1(x1);
      double f_x2 = f1(x2);
      while ((b - a) * len > 1e-9 && (b - a) > 1e-12) {
        if (f_x1 <= f_x2) {
          b = x2;
          x2 = x1;
          f_x2 = f_x1;
          x1 = b - kGolden * (b - a);
          f_x1 = f1(x1);
        } else {
          a = x1;
          x1 = x2;
          f_x1 = f_x2;
          x2 = a + kGolden * (b - a);
          f_x2 = f1(x2);
        }
      }
      const double cand = 0.5 * (a + b);
      const double fc = f1(cand);
      if (fc < best) {
        moved = std::max(moved, std::abs(cand - t[i]) * len);
        t[i] = cand;
        best = fc;
      }
    }
    if (moved < 1e-7) break;
  }

  // Compass search along coordinate and pairwise-diagonal directions.
  std::vector<std::array<double, K>> dirs;
  for (std::size_t a = 0; a < nf; ++a) {
    for (double s : {1.0, -1.0}) {
      std::array<double, K> d{};
      d[free_idx[a]] = s;
      dirs.push_back(d);
    }
    for (std::size_t b = a + 1; b < nf; ++b) {
      for (double sa : {1.0, -1.0}) {
        for (double sb : {1.0, -1.0}) {
          std::array<double, K> d{};
          d[free_idx[a]] = sa;
          d[free_idx[b]] = sb;
          dirs.push_back(d);
        }
      }
    }
  }
  for (double step = 0.05; step > 1e-7;) {
    bool improved = false;
    for (const auto& d : dirs) {
      std::array<double, K> trial = t;
      for (std::size_t i : free_idx) trial[i] = std::clamp(t[i] + step * d[i], t_min, 1.0);
      const double v = value(trial);
      if (v < best - 1e-15) {
        best = v;
        t = trial;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return place(t);
}

}  // namespace

BezierCurve::BezierCurve(std::vector<Vec2> control_points) : pts_(std::move(control_points)) {
  if (pts_.empty()) throw DegenerateInput("Bezier curve needs at least one control point");
}

Vec2 BezierCurve::evaluate(double theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("Bezier parameter outside [0, 1]");
  return de_casteljau(pts_, theta);
}

Vec2 BezierCurve::evaluate_unchecked(double theta) const { return de_casteljau(pts_, theta); }

BezierCurve BezierCurve::derivative() const {
  const int n = degree();
  if (n < 1) return BezierCurve({Vec2(0.0, 0.0)});
  std::vector<Vec2> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d[i] = n * (pts_[i + 1] - pts_[i]);
  return BezierCurve(std::move(d));
}

double BezierCurve::polygon_length() const {
  double s = 0.0;
  for (std::size_t i = 1; i < pts_.size(); ++i) s += (pts_[i] - pts_[i - 1]).norm();
  return s;
}

double curvature(const BezierCurve& c, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("Bezier parameter outside [0, 1]");
  const BezierCurve d1 = c.derivative();
  const BezierCurve d2 = d1.derivative();
  return curvature_from(d1, d2, theta);
}

double max_abs_curvature(const BezierCurve& c) {
  const auto& p = c.control_points();
  if (c.degree() < 1) throw DegenerateTangent("degree-0 curve has no tangent");
  if (c.degree() == 1) {
    if ((p[1] - p[0]).norm() <= 1e-9) throw DegenerateTangent("zero-length segment");
    return 0.0;
  }
  if (c.degree() == 2) return quadratic_max_curvature(p[0], p[1], p[2]);

  const BezierCurve d1 = c.derivative();
  const BezierCurve d2 = d1.derivative();
  auto k = [&](double t) { return std::abs(curvature_from(d1, d2, t)); };
  constexpr int kSamples = 200;
  int best_i = 0;
  double best = -1.0;
  for (int i = 0; i < kSamples; ++i) {
    const double v = k(static_cast<double>(i) / (kSamples - 1));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double a = std::max(0, best_i - 1) / static_cast<double>(kSamples - 1);
  double b = std::min(kSamples - 1, best_i + 1) / static_cast<double>(kSamples - 1);
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = k(x1);
  double f2 = k(x2);
  while (b - a > 1e-12) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = k(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = k(x2);
    }
  }
  return std::max({best, f1, f2});
}

double arc_length(const BezierCurve& c) {
  if (c.degree() < 1) return 0.0;
  const BezierCurve d1 = c.derivative();
  static constexpr double kNodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                       0.5384693101056831, 0.9061798459386640};
  static constexpr double kWeights[5] = {0.2369268850561891, 0.4786286704993665,
                                         0.5688888888888889, 0.4786286704993665,
                                         0.2369268850561891};
  constexpr int kPieces = 64;
  double s = 0.0;
  for (int i = 0; i < kPieces; ++i) {
    const double a = static_cast<double>(i) / kPieces;
    const double h = 1.0 / kPieces;
    for (int j = 0; j < 5; ++j) {
      s += 0.5 * h * kWeights[j] * d1.evaluate_unchecked(a + 0.5 * h * (kNodes[j] + 1.0)).norm();
    }
  }
  return s;
}

std::pair<BezierCurve, BezierCurve> cubic_to_quadratics(const std::array<Vec2, 4>& p) {
  const Vec2 mid = (p[0] + 3.0 * p[1] + 3.0 * p[2] + p[3]) / 8.0;
  const Vec2 e1 = (9.0 * p[0] + 21.0 * p[1] + 3.0 * p[2] - p[3]) / 32.0;
  const Vec2 f1 = (-p[0] + 3.0 * p[1] + 21.0 * p[2] + 9.0 * p[3]) / 32.0;
  return {BezierCurve({p[0], e1, mid}), BezierCurve({mid, f1, p[3]})};
}

std::pair<BezierCurve, BezierCurve> quartic_to_cubics(const std::array<Vec2, 5>& p) {
  const Vec2 mid = (p[0] + 4.0 * p[1] + 6.0 * p[2] + 4.0 * p[3] + p[4]) / 16.0;
  const Vec2 e1 = (227.0 * p[0] + 436.0 * p[1] + 18.0 * p[2] - 12.0 * p[3] + 3.0 * p[4]) / 672.0;
  const Vec2 e2 = (101.0 * p[0] + 268.0 * p[1] + 270.0 * p[2] + 44.0 * p[3] - 11.0 * p[4]) / 672.0;
  const Vec2 f1 = (-11.0 * p[0] + 44.0 * p[1] + 270.0 * p[2] + 268.0 * p[3] + 101.0 * p[4]) / 672.0;
  const Vec2 f2 = (3.0 * p[0] - 12.0 * p[1] + 18.0 * p[2] + 436.0 * p[3] + 227.0 * p[4]) / 672.0;
  return {BezierCurve({p[0], e1, e2, mid}), BezierCurve({mid, f1, f2, p[4]})};
}

double cubic_max_curvature_approx(const std::array<Vec2, 4>& p) {
  const auto [e, f] = cubic_to_quadratics(p);
  return std::max(max_abs_curvature(e), max_abs_curvature(f));
}

double quartic_max_curvature_approx(const std::array<Vec2, 5>& p) {
  const auto [e, f] = quartic_to_cubics(p);
  const auto& ep = e.control_points();
  const auto& fp = f.control_points();
  return std::max(cubic_max_curvature_approx({ep[0], ep[1], ep[2], ep[3]}),
                  cubic_max_curvature_approx({fp[0], fp[1], fp[2], fp[3]}));
}

double opt_quad1_length(double alpha, double beta, double phi) {
  const double c = std::cos(phi);
  return std::min(beta, 0.5 * (-c + std::sqrt(c * c + 8.0)) * alpha);
}

Vec2 opt_quad1(const Vec2& p0, const Vec2& p1, const Vec2& ray_end) {
  const Vec2 a = p1 - p0;
  const Vec2 b = ray_end - p1;
  if (a.norm() <= kGeomTol || b.norm() <= kGeomTol) {
    throw DegenerateInput("opt_quad1 needs p0 != p1 and ray_end != p1");
  }
  const double len = opt_quad1_length(a.norm(), b.norm(), angle_between(a, b));
  return p1 + len * b.normalized();
}

std::vector<Vec2> PiecewiseBezier::sample(int per_curve) const {
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    for (int i = k == 0 ? 0 : 1; i <= per_curve; ++i) {
      out.push_back(curves[k].evaluate(static_cast<double>(i) / per_curve));
    }
  }
  return out;
}

double PiecewiseBezier::length() const {
  double s = 0.0;
  for (const auto& c : curves) s += arc_length(c);
  return s;
}

Vec2 start_tangent(const BezierCurve& c) {
  const auto& p = c.control_points();
  for (std::size_t i = 1; i < p.size(); ++i) {
    const Vec2 d = p[i] - p[0];
    if (d.norm() > 1e-12) return d.normalized();
  }
  throw DegenerateTangent("curve collapsed to a point");
}

Vec2 end_tangent(const BezierCurve& c) {
  const auto& p = c.control_points();
  for (std::size_t i = p.size() - 1; i-- > 0;) {
    const Vec2 d = p.back() - p[i];
    if (d.norm() > 1e-12) return d.normalized();
  }
  throw DegenerateTangent("curve collapsed to a point");
}

std::vector<double> join_angles(const PiecewiseBezier& pw) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < pw.curves.size(); ++k) {
    out.push_back(angle_between(end_tangent(pw.curves[k]), start_tangent(pw.curves[k + 1])));
  }
  return out;
}

double hull_margin(std::span<const Vec2> points, const std::vector<Obstacle>& obstacles,
                   double clearance) {
  double m = kInf;
  if (obstacles.empty()) return m;
  const std::vector<Vec2> hull = convex_hull(points);
  for (const auto& o : obstacles) {
    m = std::min(m, distance_to_convex_polygon(o.center, hull) - o.radius - clearance);
  }
  return m;
}

bool hull_clear(std::span<const Vec2> points, const std::vector<Obstacle>& obstacles,
                double clearance) {
  return hull_margin(points, obstacles, clearance) >= 0.0;
}

double cubic_objective(const Vec2& p0, const std::array<Vec2, 3>& q) {
  try {
    return cubic_max_curvature_approx({p0, q[0], q[1], q[2]});
  } catch (const DegenerateTangent&) {
    return kInf;
  }
}

double quartic_objective(const Vec2& p0, const std::array<Vec2, 4>& q) {
  try {
    return quartic_max_curvature_approx({p0, q[0], q[1], q[2], q[3]});
  } catch (const DegenerateTangent&) {
    return kInf;
  }
}

std::array<Vec2, 3> opt_cubic(const Vec2& p0, const std::array<Locus, 3>& loci,
                              const ControlPointSearch& search) {
  return search_loci<3>(
      p0, loci, [&](const Points<3>& q) { return cubic_objective(p0, q); }, search);
}

std::array<Vec2, 4> opt_quar(const Vec2& p0, const std::array<Locus, 4>& loci,
                             const ControlPointSearch& search) {
  return search_loci<4>(
      p0, loci, [&](const Points<4>& q) { return quartic_objective(p0, q); }, search);
}

double farthest_clear(const std::vector<Vec2>& base, const Vec2& from, const Vec2& to,
                      const std::vector<Obstacle>& obstacles, double clearance, double tol) {
  std::vector<Vec2> pts = base;
  pts.push_back(to);
  if (hull_clear(pts, obstacles, clearance)) return 1.0;
  const double len = (to - from).norm();
  double lo = 0.0;
  double hi = 1.0;
  while ((hi - lo) * len > tol) {
    const double mid = 0.5 * (lo + hi);
    pts.back() = from + mid * (to - from);
    (hull_clear(pts, obstacles, clearance) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace seaplan
