#include "seaplan/env_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

namespace seaplan {

namespace {

constexpr double kMergeTol = 1e-7;

double inflated_radius(const Obstacle& ob, double inflation) { return ob.radius + inflation; }

bool segment_clear(const Vec2& a, const Vec2& b, const std::vector<Obstacle>& obstacles,
                   double inflation) {
  for (const auto& ob : obstacles) {
    if (point_segment_distance(ob.center, a, b) < inflated_radius(ob, inflation) - 1e-9) return false;
  }
  return true;
}

int find_or_add(std::vector<Vec2>& vertices, const Vec2& p) {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if ((vertices[i] - p).norm() < kMergeTol) return static_cast<int>(i);
  }
  vertices.push_back(p);
  return static_cast<int>(vertices.size()) - 1;
}

bool on_frame(const Vec2& p, const Box& b) {
  return std::abs(p.x() - b.lo.x()) < kMergeTol || std::abs(p.x() - b.hi.x()) < kMergeTol ||
         std::abs(p.y() - b.lo.y()) < kMergeTol || std::abs(p.y() - b.hi.y()) < kMergeTol;
}

bool same_frame_side(const Vec2& p, const Vec2& q, const Box& b) {
  return (std::abs(p.x() - b.lo.x()) < kMergeTol && std::abs(q.x() - b.lo.x()) < kMergeTol) ||
         (std::abs(p.x() - b.hi.x()) < kMergeTol && std::abs(q.x() - b.hi.x()) < kMergeTol) ||
         (std::abs(p.y() - b.lo.y()) < kMergeTol && std::abs(q.y() - b.lo.y()) < kMergeTol) ||
         (std::abs(p.y() - b.hi.y()) < kMergeTol && std::abs(q.y() - b.hi.y()) < kMergeTol);
}

double min_site_distance(const Vec2& a, const Vec2& b, const std::vector<Vec2>& sites) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : sites) best = std::min(best, point_segment_distance(s, a, b));
  return best;
}

int nearest_site(const Vec2& p, const std::vector<Vec2>& sites) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double d = (sites[i] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

void add_edge(RoadmapGraph& g, std::map<std::pair<int, int>, int>& index, int a, int b,
              bool boundary) {
  if (a == b) return;
  const auto key = std::minmax(a, b);
  if (index.count(key)) return;
  RoadmapEdge e;
  e.a = key.first;
  e.b = key.second;
  e.length = (g.vertices[a] - g.vertices[b]).norm();
  e.clearance = g.sites.empty() ? std::numeric_limits<double>::infinity()
                                : min_site_distance(g.vertices[a], g.vertices[b], g.sites);
  e.boundary = boundary;
  index[key] = static_cast<int>(g.edges.size());
  g.edges.push_back(e);
}

void hook_endpoint(RoadmapGraph& g, std::map<std::pair<int, int>, int>& index, int endpoint,
                   int site, const Environment& env, double inflation) {
  const Vec2 p = g.vertices[endpoint];
  for (int v : g.site_cells[site]) {
    if (v == g.start || v == g.goal) continue;
    if (segment_clear(p, g.vertices[v], env.obstacles, inflation)) {
      add_edge(g, index, endpoint, v, false);
    }
  }
}

}  // namespace

void Environment::validate(double inflation) const {
  if (bounds.degenerate()) throw EmptyEnvironment("environment bounds are degenerate");
  if (!bounds.contains(start)) throw ValidationError("start lies outside the bounds");
  if (!bounds.contains(goal)) throw ValidationError("goal lies outside the bounds");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& ob = obstacles[i];
    if (ob.radius < 0.0) {
      throw ValidationError("obstacles[" + std::to_string(i) + "].radius is negative");
    }
    const double r = ob.radius + inflation;
    if ((start - ob.center).norm() < r) {
      throw ValidationError("start lies inside inflated obstacles[" + std::to_string(i) + "]");
    }
    if ((goal - ob.center).norm() < r) {
      throw ValidationError("goal lies inside inflated obstacles[" + std::to_string(i) + "]");
    }
  }
}

std::vector<std::vector<std::pair<int, int>>> RoadmapGraph::adjacency() const {
  std::vector<std::vector<std::pair<int, int>>> adj(vertices.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    adj[edges[i].a].emplace_back(edges[i].b, static_cast<int>(i));
    adj[edges[i].b].emplace_back(edges[i].a, static_cast<int>(i));
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

double RoadmapGraph::path_length(const std::vector<int>& path) const {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += (vertices[path[i]] - vertices[path[i - 1]]).norm();
  return len;
}

std::vector<Vec2> RoadmapGraph::path_points(const std::vector<int>& path) const {
  std::vector<Vec2> pts;
  pts.reserve(path.size());
  for (int v : path) pts.push_back(vertices[v]);
  return pts;
}

bool RoadmapGraph::is_interior_vertex(int v, const Box& bounds) const {
  return !on_frame(vertices[v], bounds) && v != start && v != goal;
}

RoadmapGraph build_roadmap(const Environment& env, double inflation) {
  if (env.bounds.degenerate()) throw EmptyEnvironment("environment bounds are degenerate");

  RoadmapGraph g;
  for (const auto& ob : env.obstacles) {
    const bool dup = std::any_of(g.sites.begin(), g.sites.end(),
                                 [&](const Vec2& s) { return (s - ob.center).norm() < 1e-9; });
    if (!dup) g.sites.push_back(ob.center);
  }

  std::map<std::pair<int, int>, int> edge_index;

  if (g.sites.empty()) {
    g.vertices = {env.start, env.goal};
    g.start = 0;
    g.goal = 1;
    add_edge(g, edge_index, 0, 1, false);
    return g;
  }

  const auto frame = env.bounds.polygon();
  g.cell_polygons.resize(g.sites.size());
  g.site_cells.resize(g.sites.size());
  for (std::size_t i = 0; i < g.sites.size(); ++i) {
    std::vector<Vec2> poly = frame;
    const Vec2& si = g.sites[i];
    for (std::size_t j = 0; j < g.sites.size() && !poly.empty(); ++j) {
      if (i == j) continue;
      const Vec2& sj = g.sites[j];
      poly = clip_half_plane(poly, sj - si, 0.5 * (sj.squaredNorm() - si.squaredNorm()));
    }
    std::vector<Vec2> cleaned;
    for (const auto& p : poly) {
      if (cleaned.empty() || (cleaned.back() - p).norm() >= kMergeTol) cleaned.push_back(p);
    }
    while (cleaned.size() > 1 && (cleaned.back() - cleaned.front()).norm() < kMergeTol) cleaned.pop_back();
    g.cell_polygons[i] = cleaned;
    std::vector<int> cycle;
    for (const auto& p : cleaned) {
      const int v = find_or_add(g.vertices, p);
      if (cycle.empty() || cycle.back() != v) cycle.push_back(v);
    }
    while (cycle.size() > 1 && cycle.back() == cycle.front()) cycle.pop_back();
    g.site_cells[i] = cycle;
  }

  for (const auto& cycle : g.site_cells) {
    for (std::size_t k = 0; k < cycle.size() && cycle.size() > 1; ++k) {
      const int a = cycle[k];
      const int b = cycle[(k + 1) % cycle.size()];
      add_edge(g, edge_index, a, b, same_frame_side(g.vertices[a], g.vertices[b], env.bounds));
    }
  }

  g.vertices.push_back(env.start);
  g.start = static_cast<int>(g.vertices.size()) - 1;
  g.vertices.push_back(env.goal);
  g.goal = static_cast<int>(g.vertices.size()) - 1;
  g.start_site = nearest_site(env.start, g.sites);
  g.goal_site = nearest_site(env.goal, g.sites);

  hook_endpoint(g, edge_index, g.start, g.start_site, env, inflation);
  hook_endpoint(g, edge_index, g.goal, g.goal_site, env, inflation);
  if (g.start_site == g.goal_site && segment_clear(env.start, env.goal, env.obstacles, inflation)) {
    add_edge(g, edge_index, g.start, g.goal, false);
  }
  return g;
}

RoadmapGraph prune_narrow(const RoadmapGraph& g, double min_clearance) {
  if (min_clearance < 0.0) throw DomainError("min_clearance must be non-negative");
  std::vector<RoadmapEdge> kept;
  std::vector<int> degree(g.vertices.size(), 0);
  for (const auto& e : g.edges) {
    if (e.clearance >= min_clearance) {
      kept.push_back(e);
      ++degree[e.a];
      ++degree[e.b];
    }
  }
  if (degree[g.start] == 0 || degree[g.goal] == 0) {
    throw Disconnected("start or goal isolated after pruning");
  }

  std::vector<int> remap(g.vertices.size(), -1);
  RoadmapGraph out;
  out.sites = g.sites;
  out.cell_polygons = g.cell_polygons;
  out.start_site = g.start_site;
  out.goal_site = g.goal_site;
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    if (degree[v] > 0) {
      remap[v] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(g.vertices[v]);
    }
  }
  for (auto e : kept) {
    e.a = remap[e.a];
    e.b = remap[e.b];
    out.edges.push_back(e);
  }
  out.start = remap[g.start];
  out.goal = remap[g.goal];
  out.site_cells.resize(g.site_cells.size());
  for (std::size_t i = 0; i < g.site_cells.size(); ++i) {
    for (int v : g.site_cells[i]) {
      if (remap[v] >= 0) out.site_cells[i].push_back(remap[v]);
    }
  }
  // Connectivity check doubles as the Disconnected error path.
  shortest_path(out, out.start, out.goal);
  return out;
}

std::vector<int> shortest_path(const RoadmapGraph& g, int a, int b) {
  return shortest_path(g, a, b, -1);
}

std::vector<int> shortest_path(const RoadmapGraph& g, int a, int b, int banned) {
  const int n = static_cast<int>(g.vertices.size());
  if (a < 0 || a >= n || b < 0 || b >= n) throw DomainError("vertex index out of range");
  if (a == b) return {a};
  const auto adj = g.adjacency();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<int> pred(n, -1);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[a] = 0.0;
  pq.emplace(0.0, a);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == b) break;
    for (const auto& [v, ei] : adj[u]) {
      if (v == banned || done[v]) continue;
      const double nd = d + g.edges[ei].length;
      const double tie = 1e-12 * std::max(1.0, nd);
      if (nd < dist[v] - tie || (std::abs(nd - dist[v]) <= tie && u < pred[v])) {
        if (nd < dist[v]) dist[v] = nd;
        pred[v] = u;
        pq.emplace(dist[v], v);
      }
    }
  }
  if (!std::isfinite(dist[b])) throw Disconnected("no path between the requested vertices");
  std::vector<int> path;
  for (int v = b; v != -1; v = pred[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

PathPartition partition_path(const std::vector<Vec2>& path, const Vec2& position, double sensor_range) {
  if (path.empty()) throw DomainError("partition of an empty path");
  PathPartition part;
  const std::size_t last = path.size() - 1;
  part.first_end = std::min<std::size_t>(1, last);
  part.middle_end = part.first_end;
  while (part.middle_end < last && (path[part.middle_end + 1] - position).norm() <= sensor_range) {
    ++part.middle_end;
  }
  return part;
}

std::vector<PathCandidate> candidate_paths(const RoadmapGraph& g, const Environment& /*env*/) {
  const auto adj = g.adjacency();
  std::vector<PathCandidate> out;
  for (const auto& [v, ei] : adj[g.start]) {
    (void)ei;
    std::vector<int> path{g.start};
    if (v == g.goal) {
      path.push_back(g.goal);
    } else {
      std::vector<int> rest;
      try {
        rest = shortest_path(g, v, g.goal, g.start);
      } catch (const Disconnected&) {
        continue;
      }
      path.insert(path.end(), rest.begin(), rest.end());
    }
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const PathCandidate& c) { return c.vertices == path; });
    if (dup) continue;
    PathCandidate c;
    c.vertices = path;
    c.points = g.path_points(path);
    c.length = g.path_length(path);
    out.push_back(std::move(c));
  }
  if (out.empty()) throw Disconnected("no candidate path from the start cell");
  return out;
}

JerkCoefficients jerk_coefficients(double dp, double dv, double T) {
  if (!(T > 0.0)) throw NonpositiveDuration("segment duration must be positive");
  const double T2 = T * T;
  const double T5 = T2 * T2 * T;
  return {(320.0 * dp - 120.0 * T * dv) / T5, (-200.0 * T * dp + 72.0 * T2 * dv) / T5,
          (40.0 * T2 * dp - 12.0 * T2 * T * dv) / T5};
}

AccelCoefficients accel_coefficients(double dp, double dv, double T) {
  if (!(T > 0.0)) throw NonpositiveDuration("segment duration must be positive");
  const double T3 = T * T * T;
  return {(12.0 * dp - 6.0 * T * dv) / T3, (-6.0 * T * dp + 2.0 * T * T * dv) / T3};
}

double jerk_cost(const Vec2& p0, const Vec2& pf, const Vec2& v0, const Vec2& a0, const Vec2& vf,
                 const std::array<double, 2>& T) {
  double J = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double t = T[k];
    if (!(t > 0.0)) throw NonpositiveDuration("segment duration must be positive");
    const double dv = vf[k] - (a0[k] * t + v0[k]);
    const double dp = pf[k] - (0.5 * a0[k] * t * t + v0[k] * t + p0[k]);
    const auto [al, be, ga] = jerk_coefficients(dp, dv, t);
    J += ga * ga + be * ga * t + be * be * t * t / 3.0 + al * ga * t * t / 3.0 +
         al * be * t * t * t / 4.0 + al * al * t * t * t * t / 20.0;
  }
  return J;
}

double accel_cost(const Vec2& p0, const Vec2& pf, const Vec2& v0, const Vec2& vf,
                  const std::array<double, 2>& T) {
  double A = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double t = T[k];
    if (!(t > 0.0)) throw NonpositiveDuration("segment duration must be positive");
    const double dp = pf[k] - (v0[k] * t + p0[k]);
    const double dv = vf[k] - v0[k];
    const auto [al, be] = accel_coefficients(dp, dv, t);
    A += al * al * t * t / 3.0 + al * be * t + be * be;
  }
  return A;
}

double priority_switch(double x, double c) {
  if (x >= 0.0 && x < c) return 1.0;
  if (x > -c && x < 0.0) return -1.0;
  return 0.0;
}

double priority_difference(const PathCandidate& a, const PathCandidate& b, double w1, double w2,
                           double c) {
  const double jd = a.J - b.J;
  const double ad = a.A - b.A;
  const double ld = a.L - b.L;
  const double pj = priority_switch(jd, c);
  return jd + w1 * pj * ad + w2 * pj * priority_switch(ad, c) * ld;
}

PriorityOrder compare_priority(const PathCandidate& a, const PathCandidate& b, double w1, double w2,
                               double c) {
  const double v = priority_difference(a, b, w1, w2, c);
  if (v < 0.0) return PriorityOrder::Less;
  if (v > 0.0) return PriorityOrder::Greater;
  return PriorityOrder::Equal;
}

namespace {

Vec2 unit_or_zero(const Vec2& v) {
  const double n = v.norm();
  return n > 0.0 ? Vec2(v / n) : Vec2::Zero();
}

}  // namespace

void evaluate_candidate(PathCandidate& cand, const KinematicPose& pose, const SelectionParams& sp) {
  const auto& pts = cand.points;
  cand.partition = partition_path(pts, pose.position, sp.sensor_range);
  cand.J = cand.A = cand.L = 0.0;
  const std::size_t n = pts.size();
  if (n < 2) return;
  const double U = sp.desired_speed;
  auto leg_dir = [&](std::size_t i) { return unit_or_zero(pts[i + 1] - pts[i]); };
  auto exit_velocity = [&](std::size_t i) {
    // Velocity at the end of leg i: aimed along the next leg when there is one.
    return U * (i + 2 < n ? leg_dir(i + 1) : leg_dir(i));
  };

  const double len0 = (pts[1] - pts[0]).norm();
  if (len0 > 0.0) {
    const double T = len0 / U;
    cand.J = jerk_cost(pts[0], pts[1], pose.velocity, pose.acceleration, exit_velocity(0), {T, T});
  }
  for (std::size_t i = cand.partition.first_end; i < cand.partition.middle_end; ++i) {
    const double len = (pts[i + 1] - pts[i]).norm();
    if (len <= 0.0) continue;
    const double T = len / U;
    cand.A += accel_cost(pts[i], pts[i + 1], U * leg_dir(i - 1), exit_velocity(i), {T, T});
  }
  for (std::size_t i = cand.partition.middle_end; i + 1 < n; ++i) cand.L += (pts[i + 1] - pts[i]).norm();
}

PathCandidate select_path(std::vector<PathCandidate> candidates, const KinematicPose& pose,
                          const SelectionParams& sp) {
  if (candidates.empty()) throw DomainError("select_path needs at least one candidate");
  double mean_j = 0.0;
  for (auto& c : candidates) {
    evaluate_candidate(c, pose, sp);
    mean_j += c.J;
  }
  mean_j /= static_cast<double>(candidates.size());
  const double thr = sp.c.value_or(0.1 * mean_j);

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto ord = compare_priority(candidates[i], candidates[best], sp.w1, sp.w2, thr);
    bool take = ord == PriorityOrder::Less;
    if (ord == PriorityOrder::Equal) {
      const double li = candidates[i].length;
      const double lb = candidates[best].length;
      if (li < lb - 1e-12) {
        take = true;
      } else if (std::abs(li - lb) <= 1e-12) {
        take = candidates[i].vertices < candidates[best].vertices;
      }
    }
    if (take) best = i;
  }
  return candidates[best];
}

}  // namespace seaplan
