#include "seaplan/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace seaplan {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 640.0;
constexpr double kPad = 40.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) { return fmt::format("{:.17g}", v); }

/// Equal-aspect map from world coordinates to the SVG canvas (y up).
struct Frame {
  Box box;
  double scale = 1.0;

  explicit Frame(const Box& b) : box(b) {
    const Vec2 ext = b.hi - b.lo;
    scale = std::min((kWidth - 2 * kPad) / std::max(ext.x(), 1e-9), (kHeight - 2 * kPad) / std::max(ext.y(), 1e-9));
  }
  double x(double wx) const { return kPad + (wx - box.lo.x()) * scale; }
  double y(double wy) const { return kHeight - kPad - (wy - box.lo.y()) * scale; }
};

std::string svg_open(const std::string& title) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<title>{2}</title>\n<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      kWidth, kHeight, title);
}

std::string polyline(const Frame& f, const std::vector<Vec2>& pts, const std::string& color, double width,
                     const std::string& cls) {
  std::string s = fmt::format("<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" points=\"", cls,
                              color, width);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s += fmt::format("{}{:.3f},{:.3f}", i ? " " : "", f.x(pts[i].x()), f.y(pts[i].y()));
  }
  return s + "\"/>\n";
}

std::string obstacles_svg(const Frame& f, const std::vector<Obstacle>& obs) {
  std::string s;
  for (const auto& o : obs) {
    s += fmt::format("<circle class=\"obstacle\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{:.3f}\" fill=\"#444\"/>\n",
                     f.x(o.center.x()), f.y(o.center.y()), std::max(o.radius * f.scale, 1.0));
  }
  return s;
}

}  // namespace

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string steps_csv(const RunLog& log) {
  std::string s = "t,x,y,psi,u,v,r,X,N,plan,margin,power,ref_x,ref_y,deviation,tracking_error,fallback\n";
  for (const auto& r : log.steps) {
    const State6& q = r.state;
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", num(r.t), num(q.x), num(q.y), num(q.psi),
                     num(q.u), num(q.v), num(q.r), num(r.command.X), num(r.command.N), r.plan, num(r.margin),
                     num(r.power), num(r.reference.x()), num(r.reference.y()), num(r.deviation),
                     num(r.tracking_error), r.fallback ? 1 : 0);
  }
  return s;
}

std::string cycles_csv(const RunLog& log) {
  std::string s =
      "k,t_s,t_d,t_u,next_t_s,splice_length,iterations,fallback,regenerated,padded,known_obstacles,min_margin,"
      "max_defect,box_excess,status\n";
  for (const auto& c : log.cycles) {
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", c.k, num(c.t_s), num(c.t_d), num(c.t_u),
                     num(c.next_t_s), num(c.splice_length), c.iterations, c.fallback ? 1 : 0,
                     c.regenerated ? 1 : 0, c.padded ? 1 : 0, c.known_obstacles, num(c.min_margin),
                     num(c.max_defect), num(c.box_excess), c.status);
  }
  return s;
}

std::string summary_text(const RunLog& log) {
  return fmt::format(
      "scenario {}\nk_ec {}\nstatus {}\nexit_code {}\nenergy_J {}\nduration_s {}\nrms_tracking_error_m {}\n"
      "rms_deviation_m {}\nmean_deviation_m {}\nmin_margin_m {}\nsteps {}\ncycles {}\ntracker_fallbacks {}\n"
      "planner_fallbacks {}\n",
      log.scenario, num(log.k_ec), to_string(log.status), log.exit_code(), num(log.energy), num(log.duration),
      num(log.rms_tracking_error), num(log.rms_deviation), num(log.mean_deviation), num(log.min_margin),
      log.steps.size(), log.cycles.size(), log.tracker_fallbacks, log.planner_fallbacks);
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "k_ec,energy_J,rms_deviation_m,mean_deviation_m,min_margin_m,status\n";
  for (const auto& r : rows) {
    s += fmt::format("{},{},{},{},{},{}\n", num(r.k_ec), num(r.energy), num(r.rms_deviation), num(r.mean_deviation),
                     num(r.min_margin), to_string(r.status));
  }
  return s;
}

std::string reference_csv(const ReferenceTrajectory& ref) {
  std::string s = "t,x_d,y_d,psi_d,u_d,v_d,r_d\n";
  for (std::size_t i = 0; i < ref.samples.size(); ++i) {
    const State6& q = ref.samples[i];
    s += fmt::format("{},{},{},{},{},{},{}\n", num(ref.time_of(i)), num(q.x), num(q.y), num(q.psi), num(q.u),
                     num(q.v), num(q.r));
  }
  return s;
}

std::string roadmap_csv(const RoadmapGraph& g) {
  std::string s = "kind,a,b,x0,y0,x1,y1,length,clearance\n";
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    s += fmt::format("vertex,{},,{},{},,,,\n", i, num(g.vertices[i].x()), num(g.vertices[i].y()));
  }
  for (const auto& e : g.edges) {
    const Vec2& a = g.vertices[e.a];
    const Vec2& b = g.vertices[e.b];
    s += fmt::format("edge,{},{},{},{},{},{},{},{}\n", e.a, e.b, num(a.x()), num(a.y()), num(b.x()), num(b.y()),
                     num(e.length), num(e.clearance));
  }
  return s;
}

CsvTotals parse_steps_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty steps CSV");
  CsvTotals out;
  double prev_t = 0.0;
  double prev_p = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() < 12) throw ParseError("short steps CSV row");
    const double t = std::stod(cols[0]);
    const double p = std::stod(cols[11]);
    if (out.rows > 0) out.energy += 0.5 * (p + prev_p) * (t - prev_t);
    prev_t = t;
    prev_p = p;
    out.duration = t;
    ++out.rows;
  }
  return out;
}

std::string trajectory_svg(const RunLog& log) {
  const Frame f(log.bounds);
  std::string s = svg_open("trajectory " + log.scenario);
  s += obstacles_svg(f, log.obstacles);
  for (std::size_t j = 0; j < log.reference_paths.size(); ++j) {
    s += polyline(f, log.reference_paths[j], "#999999", 1.0, "reference");
  }
  for (std::size_t j = 0; j < log.plan_paths.size(); ++j) {
    s += polyline(f, log.plan_paths[j], kPalette[j % 10], 1.5, "plan");
  }
  std::vector<Vec2> track;
  for (const auto& r : log.steps) track.push_back(r.state.position());
  s += polyline(f, track, "black", 1.0, "executed");
  s += fmt::format("<circle class=\"goal\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"4\" fill=\"none\" stroke=\"red\"/>\n",
                   f.x(log.goal.x()), f.y(log.goal.y()));
  return s + "</svg>\n";
}

std::string line_chart_svg(const std::vector<double>& x, const std::vector<double>& y, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
  Box b;
  if (x.empty()) {
    b = {{0.0, 0.0}, {1.0, 1.0}};
  } else {
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    b = {{*xmin, *ymin}, {std::max(*xmax, *xmin + 1e-9), std::max(*ymax, *ymin + 1e-9)}};
  }
  const double sx = (kWidth - 2 * kPad) / (b.hi.x() - b.lo.x());
  const double sy = (kHeight - 2 * kPad) / (b.hi.y() - b.lo.y());
  std::string s = svg_open(title);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kPad, kHeight - kPad,
                   kWidth - kPad);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kPad, kPad,
                   kHeight - kPad);
  s += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n", kWidth / 2, kHeight - 8, x_label);
  s += fmt::format("<text x=\"4\" y=\"{}\" font-size=\"12\">{} [{:.4g}, {:.4g}]</text>\n", kPad - 8, y_label, b.lo.y(),
                   b.hi.y());
  s += "<polyline class=\"series\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += fmt::format("{}{:.3f},{:.3f}", i ? " " : "", kPad + (x[i] - b.lo.x()) * sx,
                     kHeight - kPad - (y[i] - b.lo.y()) * sy);
  }
  return s + "\"/>\n</svg>\n";
}

std::string geometry_svg(const Box& bounds, const std::vector<Obstacle>& obstacles, const RoadmapGraph* g,
                         const std::vector<Vec2>& waypoints, const PiecewiseBezier& path) {
  const Frame f(bounds);
  std::string s = svg_open("global plan");
  s += obstacles_svg(f, obstacles);
  if (g) {
    for (const auto& e : g->edges) {
      s += polyline(f, {g->vertices[e.a], g->vertices[e.b]}, "#bbbbbb", 0.8, "roadmap");
    }
  }
  s += polyline(f, waypoints, "#ff7f0e", 1.2, "waypoints");
  s += polyline(f, path.sample(64), "#1f77b4", 1.8, "curve");
  return s + "</svg>\n";
}

void export_run(const RunLog& log, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "steps.csv", steps_csv(log));
  write_file(dir / "cycles.csv", cycles_csv(log));
  write_file(dir / "summary.txt", summary_text(log));
  write_file(dir / "trajectory.svg", trajectory_svg(log));
  std::vector<double> t;
  std::vector<double> err;
  std::vector<double> pw;
  for (const auto& r : log.steps) {
    t.push_back(r.t);
    err.push_back(r.tracking_error);
    pw.push_back(r.power);
  }
  write_file(dir / "tracking_error.svg", line_chart_svg(t, err, "tracking error", "t (s)", "error (m)"));
  write_file(dir / "power.svg", line_chart_svg(t, pw, "actuator power", "t (s)", "power (W)"));
}

}  // namespace seaplan
