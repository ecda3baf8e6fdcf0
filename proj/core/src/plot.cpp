#include "rpc/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

namespace rpc {

namespace {

constexpr double kWidth = 800.0;
constexpr double kMargin = 52.0;

const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                          "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};

std::string fnum(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

/// Data-to-pixel mapping over a fixed canvas, y axis pointing up.
struct Frame {
  double width = kWidth;
  double height = 500.0;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  void fit(double xa, double xb, double ya, double yb) {
    if (!(xb > xa)) xb = xa + 1.0;
    if (!(yb > ya)) yb = ya + 1.0;
    const double px = 0.05 * (xb - xa), py = 0.05 * (yb - ya);
    x0 = xa - px;
    x1 = xb + px;
    y0 = ya - py;
    y1 = yb + py;
  }
  double sx(double x) const {
    return kMargin + (x - x0) / (x1 - x0) * (width - 2.0 * kMargin);
  }
  double sy(double y) const {
    return height - kMargin - (y - y0) / (y1 - y0) * (height - 2.0 * kMargin);
  }
};

class Bounds {
 public:
  void add(double x, double y) {
    x_min_ = std::min(x_min_, x);
    x_max_ = std::max(x_max_, x);
    y_min_ = std::min(y_min_, y);
    y_max_ = std::max(y_max_, y);
    seen_ = true;
  }
  bool empty() const { return !seen_; }
  void apply(Frame& f) const {
    if (seen_) f.fit(x_min_, x_max_, y_min_, y_max_);
  }

 private:
  double x_min_ = std::numeric_limits<double>::infinity();
  double x_max_ = -std::numeric_limits<double>::infinity();
  double y_min_ = std::numeric_limits<double>::infinity();
  double y_max_ = -std::numeric_limits<double>::infinity();
  bool seen_ = false;
};

void open_svg(std::ostringstream& out, const Frame& f, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fnum(f.width)
      << "\" height=\"" << fnum(f.height) << "\" viewBox=\"0 0 " << fnum(f.width) << ' '
      << fnum(f.height) << "\">\n";
  out << "<defs><marker id=\"wp\" markerWidth=\"6\" markerHeight=\"6\" refX=\"3\" "
         "refY=\"3\"><rect x=\"1\" y=\"1\" width=\"4\" height=\"4\" fill=\"#4c72b0\"/>"
         "</marker></defs>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << fnum(f.width) << "\" height=\""
      << fnum(f.height) << "\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << fnum(f.width / 2.0)
      << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
      << title << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
          const std::string& y_label) {
  const double left = kMargin, right = f.width - kMargin;
  const double top = kMargin, bottom = f.height - kMargin;
  out << "<line x1=\"" << fnum(left) << "\" y1=\"" << fnum(bottom) << "\" x2=\""
      << fnum(right) << "\" y2=\"" << fnum(bottom)
      << "\" stroke=\"#404040\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << fnum(left) << "\" y1=\"" << fnum(bottom) << "\" x2=\""
      << fnum(left) << "\" y2=\"" << fnum(top)
      << "\" stroke=\"#404040\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << fnum(left) << "\" y=\"" << fnum(bottom + 18.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
      << fnum(f.x0) << "</text>\n";
  out << "<text x=\"" << fnum(right) << "\" y=\"" << fnum(bottom + 18.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
      << fnum(f.x1) << "</text>\n";
  out << "<text x=\"" << fnum(left - 6.0) << "\" y=\"" << fnum(bottom + 4.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fnum(f.y0)
      << "</text>\n";
  out << "<text x=\"" << fnum(left - 6.0) << "\" y=\"" << fnum(top + 4.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fnum(f.y1)
      << "</text>\n";
  out << "<text x=\"" << fnum((left + right) / 2.0) << "\" y=\"" << fnum(bottom + 36.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << fnum((top + bottom) / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 "
      << fnum((top + bottom) / 2.0) << ")\">" << y_label << "</text>\n";
}

std::string close_svg(std::ostringstream& out) {
  out << "</svg>\n";
  return out.str();
}

void polyline_open(std::ostringstream& out, const std::string& attrs) {
  out << "<polyline " << attrs << " points=\"";
}

void polyline_point(std::ostringstream& out, const Frame& f, double x, double y,
                    bool first) {
  if (!first) out << ' ';
  out << fnum(f.sx(x)) << ',' << fnum(f.sy(y));
}

void cloud_rects(std::ostringstream& out, const Frame& f, const ReachCloud& cloud,
                 const char* color) {
  for (const Eigen::VectorXd& p : cloud.points) {
    if (p.size() < 2) continue;
    out << "<rect x=\"" << fnum(f.sx(p(0)) - 1.2) << "\" y=\"" << fnum(f.sy(p(1)) - 1.2)
        << "\" width=\"2.4\" height=\"2.4\" fill=\"" << color << "\" opacity=\"0.55\"/>\n";
  }
}

void obstacle_circles(std::ostringstream& out, const Frame& f, const Scenario& scenario) {
  const double scale = (f.width - 2.0 * kMargin) / (f.x1 - f.x0);
  for (const Obstacle& ob : scenario.obstacles) {
    out << "<circle cx=\"" << fnum(f.sx(ob.center.x())) << "\" cy=\""
        << fnum(f.sy(ob.center.y())) << "\" r=\""
        << fnum((ob.radius + scenario.clearance) * scale)
        << "\" fill=\"#f3d1d1\" stroke=\"#b04444\" stroke-width=\"1\"/>\n";
  }
}

}  // namespace

std::string render_path_svg(const Scenario& scenario, const WaypointPath& path,
                            const TrajectoryLog& log,
                            const std::vector<ReachCloud>& clouds) {
  std::ostringstream out;
  Frame f;
  if (log.samples.empty()) {
    open_svg(out, f, "path");
    axes(out, f, "x", "y");
    return close_svg(out);
  }

  Bounds b;
  for (const Obstacle& ob : scenario.obstacles) {
    b.add(ob.center.x() - ob.radius - scenario.clearance,
          ob.center.y() - ob.radius - scenario.clearance);
    b.add(ob.center.x() + ob.radius + scenario.clearance,
          ob.center.y() + ob.radius + scenario.clearance);
  }
  for (const Eigen::Vector2d& p : path.points) b.add(p.x(), p.y());
  for (const auto& s : log.samples) b.add(s.state(2), s.state(3));
  for (const ReachCloud& cloud : clouds)
    for (const Eigen::VectorXd& p : cloud.points)
      if (p.size() >= 2) b.add(p(0), p(1));
  b.apply(f);

  open_svg(out, f, "path");
  obstacle_circles(out, f, scenario);
  int ci = 0;
  for (const ReachCloud& cloud : clouds)
    cloud_rects(out, f, cloud, kPalette[ci++ % 8]);

  polyline_open(out, "fill=\"none\" stroke=\"#4c72b0\" stroke-width=\"1.5\" "
                     "stroke-dasharray=\"7 4\"");
  for (std::size_t i = 0; i < path.points.size(); ++i)
    polyline_point(out, f, path.points[i].x(), path.points[i].y(), i == 0);
  out << "\"/>\n";

  polyline_open(out, "fill=\"none\" stroke=\"#202020\" stroke-width=\"1.8\"");
  for (std::size_t i = 0; i < log.samples.size(); ++i)
    polyline_point(out, f, log.samples[i].state(2), log.samples[i].state(3), i == 0);
  out << "\"/>\n";

  polyline_open(out, "fill=\"none\" stroke=\"none\" marker-start=\"url(#wp)\" "
                     "marker-mid=\"url(#wp)\" marker-end=\"url(#wp)\"");
  for (std::size_t i = 0; i < path.points.size(); ++i)
    polyline_point(out, f, path.points[i].x(), path.points[i].y(), i == 0);
  out << "\"/>\n";

  axes(out, f, "x", "y");
  return close_svg(out);
}

std::string render_velocity_svg(const Scenario& scenario, const TrajectoryLog& log) {
  std::ostringstream out;
  Frame f;
  f.height = 320.0;
  if (log.samples.empty()) {
    open_svg(out, f, "velocity");
    axes(out, f, "t", "v");
    return close_svg(out);
  }

  Bounds b;
  for (const auto& s : log.samples) b.add(s.t, s.state(1));
  b.add(log.samples.front().t, scenario.v_lo);
  b.add(log.samples.back().t, scenario.v_hi);
  b.apply(f);

  open_svg(out, f, "velocity");
  out << "<rect x=\"" << fnum(f.sx(f.x0)) << "\" y=\"" << fnum(f.sy(scenario.v_hi))
      << "\" width=\"" << fnum(f.sx(f.x1) - f.sx(f.x0)) << "\" height=\""
      << fnum(f.sy(scenario.v_lo) - f.sy(scenario.v_hi))
      << "\" fill=\"#e4efe4\" stroke=\"#55a868\" stroke-width=\"0.8\"/>\n";

  polyline_open(out, "fill=\"none\" stroke=\"#202020\" stroke-width=\"1.5\"");
  for (std::size_t i = 0; i < log.samples.size(); ++i)
    polyline_point(out, f, log.samples[i].t, log.samples[i].state(1), i == 0);
  out << "\"/>\n";

  axes(out, f, "t", "v");
  return close_svg(out);
}

std::string render_clouds_svg(const Scenario& scenario, const WaypointPath& path,
                              const std::vector<ReachCloud>& clouds) {
  std::ostringstream out;
  Frame f;
  bool have_points = false;
  for (const ReachCloud& cloud : clouds)
    if (!cloud.points.empty()) have_points = true;
  if (!have_points) {
    open_svg(out, f, "clouds");
    axes(out, f, "x", "y");
    return close_svg(out);
  }

  Bounds b;
  for (const Eigen::Vector2d& p : path.points) b.add(p.x(), p.y());
  for (const ReachCloud& cloud : clouds)
    for (const Eigen::VectorXd& p : cloud.points)
      if (p.size() >= 2) b.add(p(0), p(1));
  b.apply(f);

  open_svg(out, f, "clouds");
  obstacle_circles(out, f, scenario);

  polyline_open(out, "fill=\"none\" stroke=\"#4c72b0\" stroke-width=\"1.2\" "
                     "stroke-dasharray=\"7 4\"");
  for (std::size_t i = 0; i < path.points.size(); ++i)
    polyline_point(out, f, path.points[i].x(), path.points[i].y(), i == 0);
  out << "\"/>\n";

  int ci = 0;
  for (const ReachCloud& cloud : clouds)
    cloud_rects(out, f, cloud, kPalette[ci++ % 8]);

  axes(out, f, "x", "y");
  return close_svg(out);
}

}  // namespace rpc
