#include "dephasim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dephasim/errors.hpp"

namespace dephasim {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

struct Axes {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void open(std::ostringstream& s, const std::string& title) {
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
}

void frame(std::ostringstream& s, const Axes& a, const std::string& xlabel, const std::string& ylabel,
           bool log_ticks) {
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
    << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = a.x0 + (a.x1 - a.x0) * i / 4.0;
    const double y = a.y0 + (a.y1 - a.y0) * i / 4.0;
    s << "<text x=\"" << fmt(a.px(x)) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
      << fmt(log_ticks ? std::pow(10.0, x) : x) << "</text>\n";
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(a.py(y) + 4) << "\" text-anchor=\"end\">"
      << fmt(log_ticks ? std::pow(10.0, y) : y) << "</text>\n";
  }
  s << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
    << escape(xlabel) << "</text>\n";
  s << "<text transform=\"translate(16," << (kTop + kHeight - kBottom) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
}

void polyline(std::ostringstream& s, const Axes& a, const std::vector<double>& x, const std::vector<double>& y) {
  s << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < x.size(); ++k) s << fmt(a.px(x[k])) << ',' << fmt(a.py(y[k])) << ' ';
  s << "\"/>\n";
}

Axes bounds(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty()) throw DataQualityError("plot: no data points");
  auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  Axes a{*xmin, *xmax, *ymin, *ymax};
  if (a.x1 <= a.x0) a.x1 = a.x0 + 1.0;
  if (a.y1 <= a.y0) a.y1 = a.y0 + 1.0;
  return a;
}

// White to dark blue.
std::string shade(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const int r = static_cast<int>(255 * (1 - v) + 8 * v);
  const int g = static_cast<int>(255 * (1 - v) + 48 * v);
  const int b = static_cast<int>(255 * (1 - v) + 107 * v);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string population_heatmap_svg(const CsvTable& table, const std::string& title) {
  const auto t = table.values("t");
  std::size_t sites = 0;
  while (std::find(table.header.begin(), table.header.end(), "n_" + std::to_string(sites)) != table.header.end()) {
    ++sites;
  }
  if (sites == 0 || t.size() < 2) throw DataQualityError("plot: table has no population columns");
  const std::size_t first = table.column("n_0");
  Axes a{t.front(), t.back(), -0.5, sites - 0.5};
  std::ostringstream s;
  open(s, title);
  const double cell_h = (kHeight - kTop - kBottom) / static_cast<double>(sites);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double x = a.px(t[k]);
    const double w = a.px(t[k + 1]) - x + 0.3;
    for (std::size_t j = 0; j < sites; ++j) {
      s << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(a.py(j + 0.5)) << "\" width=\"" << fmt(w)
        << "\" height=\"" << fmt(cell_h + 0.3) << "\" fill=\"" << shade(table.rows[k][first + j]) << "\"/>\n";
    }
  }
  frame(s, a, "t", "site", false);
  s << "</svg>\n";
  return s.str();
}

std::string moment_loglog_svg(const CsvTable& table, const std::string& title) {
  const auto t = table.values("t");
  const auto m = table.values("M");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] > 0.0 && m[k] > 0.0) {
      lx.push_back(std::log10(t[k]));
      ly.push_back(std::log10(m[k]));
    }
  }
  const Axes a = bounds(lx, ly);
  std::ostringstream s;
  open(s, title);
  frame(s, a, "t", "M", true);
  polyline(s, a, lx, ly);
  s << "</svg>\n";
  return s.str();
}

std::string distance_svg(const CsvTable& table, const std::string& title) {
  const auto t = table.values("t");
  const auto d = table.values("D");
  Axes a = bounds(t, d);
  a.y0 = std::min(a.y0, 0.0);
  std::ostringstream s;
  open(s, title);
  frame(s, a, "t", "D", false);
  polyline(s, a, t, d);
  s << "</svg>\n";
  return s.str();
}

}  // namespace dephasim
