#include "plus/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace plus {

namespace {

constexpr int kWidth = 640, kHeight = 480;
constexpr int kLeft = 64, kRight = 24, kTop = 32, kBottom = 48;

std::string num(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const char* series_color(Method m) {
  switch (m) {
    case Method::Lasso: return "#1f77b4";
    case Method::Mcp: return "#d62728";
    case Method::Scad: return "#2ca02c";
  }
  return "#000000";
}

}  // namespace

double metric_value(const MetricsRecord& r, const std::string& metric) {
  if (metric == "mean_me") return r.mean_me;
  if (metric == "mc_stderr_me") return r.mc_stderr_me;
  if (metric == "mean_tm") return r.mean_tm;
  if (metric == "cs_rate") return r.cs_rate;
  if (metric == "sign_rate") return r.sign_rate;
  if (metric == "false_inclusion_rate") return r.false_inclusion_rate;
  if (metric == "steps_mean") return r.steps_mean;
  throw std::invalid_argument("svg: unknown metric '" + metric + "'");
}

void write_metrics_svg(std::ostream& os, const std::vector<MetricsRecord>& records,
                       const std::string& metric, const std::string& title) {
  if (records.empty()) throw std::invalid_argument("svg: no records to plot");

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = records[0].lambda_ratio, xmax = xmin;
  double ymin = metric_value(records[0], metric), ymax = ymin;
  for (const auto& r : records) {
    const double x = r.lambda_ratio, y = metric_value(r, metric);
    series[method_name(r.method)].push_back({x, y});
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  ymin = std::min(ymin, 0.0);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return kTop + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  if (!title.empty())
    os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << title << "</text>\n";

  // Axes box and ticks.
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(plot_w)
     << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 5.0;
    const double yv = ymin + (ymax - ymin) * t / 5.0;
    os << "<line x1=\"" << num(sx(xv)) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\""
       << num(sx(xv)) << "\" y2=\"" << num(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(kTop + plot_h + 18)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << num(xv) << "</text>\n";
    os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(sy(yv)) << "\" x2=\"" << kLeft
       << "\" y2=\"" << num(sy(yv)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(sy(yv) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << num(yv, "%.3g") << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\" font-size=\"12\">lambda / sqrt(log(p)/n)</text>\n";
  os << "<text x=\"16\" y=\"" << kTop - 8 << "\" font-size=\"12\">" << metric << "</text>\n";

  // Universal penalty level sqrt(2), when inside the x-range.
  const double root2 = std::sqrt(2.0);
  if (root2 >= xmin && root2 <= xmax)
    os << "<line class=\"universal-marker\" x1=\"" << num(sx(root2)) << "\" y1=\"" << kTop
       << "\" x2=\"" << num(sx(root2)) << "\" y2=\"" << num(kTop + plot_h)
       << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";

  int legend_row = 0;
  for (const auto& [name, pts] : series) {
    const char* color = series_color(method_from_name(name));
    os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) os << ' ';
      os << num(sx(pts[i].first)) << ',' << num(sy(pts[i].second));
    }
    os << "\"/>\n";
    const double ly = kTop + 14 + 16 * legend_row++;
    os << "<line x1=\"" << kLeft + 10 << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << kLeft + 34
       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << kLeft + 40 << "\" y=\"" << num(ly) << "\" font-size=\"12\">" << name
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace plus
