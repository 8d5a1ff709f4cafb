#include "aifad/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aifad/errors.hpp"

namespace aifad {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 70;
constexpr double kRight = 200;  // room for the legend
constexpr double kTop = 40;
constexpr double kBottom = 55;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Point {
  double x, y, se;
};

double metric_value(const MetricsRow& r, Metric m) {
  switch (m) {
    case Metric::kSuccess: return r.success_rate;
    case Metric::kStoppingTime: return r.mean_stopping_time;
    case Metric::kProbes: return r.mean_probes;
  }
  return 0.0;
}

double metric_se(const MetricsRow& r, Metric m) {
  switch (m) {
    case Metric::kSuccess: return r.success_se;
    case Metric::kStoppingTime: return r.stopping_time_se;
    case Metric::kProbes: return r.probes_se;
  }
  return 0.0;
}

std::string_view metric_title(Metric m) {
  switch (m) {
    case Metric::kSuccess: return "Success rate";
    case Metric::kStoppingTime: return "Stopping time K";
    case Metric::kProbes: return "Total measurements";
  }
  return "";
}

// Pads a degenerate or tight range so single points still get an axis.
std::pair<double, double> padded(double lo, double hi) {
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::abs(lo) * 0.05, 0.05);
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.08;
  return {lo - pad, hi + pad};
}

}  // namespace

Metric parse_metric(std::string_view name) {
  for (Metric m : {Metric::kSuccess, Metric::kStoppingTime, Metric::kProbes})
    if (metric_name(m) == name) return m;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kSuccess: return "success";
    case Metric::kStoppingTime: return "stopping_time";
    case Metric::kProbes: return "probes";
  }
  return "";
}

std::string render_metric_svg(const std::vector<MetricsRow>& rows, Metric metric, double lambda) {
  std::map<std::pair<std::string, double>, std::vector<Point>> series;
  for (const auto& r : rows)
    if (std::abs(r.lambda - lambda) < 1e-12)
      series[{r.agent, r.rho}].push_back({r.pi_upper, metric_value(r, metric), metric_se(r, metric)});
  if (series.empty()) throw EmptyInput("no rows for lambda = " + label(lambda));

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    for (const auto& p : pts) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y - p.se);
      y_hi = std::max(y_hi, p.y + p.se);
    }
  }
  std::tie(x_lo, x_hi) = padded(x_lo, x_hi);
  std::tie(y_lo, y_hi) = padded(y_lo, y_hi);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(metric_title(metric)) << ", cost per measurement \xce\xbb=" << label(lambda) << "</text>\n";

  // Axes and ticks.
  os << "<g stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(kLeft + plot_w)
     << "\" y2=\"" << num(kTop + plot_h) << "\"/>\n"
     << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
     << "\" y2=\"" << num(kTop + plot_h) << "\"/>\n</g>\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / kTicks;
    const double yv = y_lo + (y_hi - y_lo) * i / kTicks;
    os << "<line x1=\"" << num(sx(xv)) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(sx(xv))
       << "\" y2=\"" << num(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(kTop + plot_h + 18)
       << "\" text-anchor=\"middle\">" << label(std::round(xv * 1000) / 1000) << "</text>\n"
       << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(sy(yv)) << "\" x2=\"" << num(kLeft)
       << "\" y2=\"" << num(sy(yv)) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(sy(yv) + 4) << "\" text-anchor=\"end\">"
       << label(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 12)
     << "\" text-anchor=\"middle\">confidence threshold \xcf\x80_upper</text>\n"
     << "<text transform=\"translate(18," << num(kTop + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(metric_title(metric)) << "</text>\n";

  // Series with error bars, then the legend.
  std::map<std::string, int> agent_dash;
  int color = 0;
  double legend_y = kTop + 10;
  const double legend_x = kLeft + plot_w + 20;
  for (const auto& [key, pts] : series) {
    const auto& [agent, rho] = key;
    const int dash = agent_dash.emplace(agent, static_cast<int>(agent_dash.size())).first->second;
    const char* stroke = kPalette[color++ % std::size(kPalette)];
    const std::string dash_attr = dash == 0 ? "" : " stroke-dasharray=\"" + std::to_string(3 * dash + 3) + ",3\"";
    os << "<g class=\"series\" stroke=\"" << stroke << "\" fill=\"" << stroke << "\">\n";
    if (pts.size() > 1) {
      os << "<polyline fill=\"none\" stroke-width=\"2\"" << dash_attr << " points=\"";
      for (const auto& p : pts) os << num(sx(p.x)) << ',' << num(sy(p.y)) << ' ';
      os << "\"/>\n";
    }
    for (const auto& p : pts) {
      const double x = sx(p.x);
      if (p.se > 0.0) {
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(sy(p.y - p.se)) << "\" x2=\"" << num(x)
           << "\" y2=\"" << num(sy(p.y + p.se)) << "\"/>\n"
           << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(sy(p.y - p.se)) << "\" x2=\"" << num(x + 4)
           << "\" y2=\"" << num(sy(p.y - p.se)) << "\"/>\n"
           << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(sy(p.y + p.se)) << "\" x2=\"" << num(x + 4)
           << "\" y2=\"" << num(sy(p.y + p.se)) << "\"/>\n";
      }
      os << "<circle class=\"marker\" cx=\"" << num(x) << "\" cy=\"" << num(sy(p.y)) << "\" r=\"3.5\"/>\n";
    }
    os << "</g>\n";
    os << "<g class=\"legend-entry\">\n"
       << "<line x1=\"" << num(legend_x) << "\" y1=\"" << num(legend_y) << "\" x2=\"" << num(legend_x + 24)
       << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"" << dash_attr << "/>\n"
       << "<text x=\"" << num(legend_x + 30) << "\" y=\"" << num(legend_y + 4) << "\">" << escape(agent)
       << ", \xcf\x81=" << label(rho) << "</text>\n</g>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_plots(const std::vector<MetricsRow>& rows, Metric metric,
                                              const std::filesystem::path& out_dir) {
  if (rows.empty()) throw EmptyInput("emit_plots: no rows");
  std::set<double> lambdas;
  for (const auto& r : rows) lambdas.insert(r.lambda);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (double lambda : lambdas) {
    const auto path = out_dir / (std::string(metric_name(metric)) + "_lambda_" + label(lambda) + ".svg");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << render_metric_svg(rows, metric, lambda);
    if (!out) throw IoError("failed writing " + path.string());
    paths.push_back(path);
  }
  return paths;
}

}  // namespace aifad
