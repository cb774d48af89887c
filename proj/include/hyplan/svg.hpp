#pragma once

// Standalone SVG charts: Pareto scatter with staircase outlines and grouped
// bar charts. Output is plain text with fixed number formatting, so files are
// byte-stable for identical inputs.

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "hyplan/metrics.hpp"

namespace hyplan::svg {

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 420.0;
inline constexpr double kLeft = 70.0;
inline constexpr double kRight = 150.0;
inline constexpr double kTop = 40.0;
inline constexpr double kBottom = 60.0;

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return colors[i % 6];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

class Canvas {
 public:
  Canvas(double x_lo, double x_hi, double y_lo, double y_hi)
      : x_lo_(x_lo), x_hi_(x_hi > x_lo ? x_hi : x_lo + 1.0), y_lo_(y_lo), y_hi_(y_hi > y_lo ? y_hi : y_lo + 1.0) {}

  [[nodiscard]] double px(double x) const { return kLeft + (x - x_lo_) / (x_hi_ - x_lo_) * plot_w(); }
  [[nodiscard]] double py(double y) const { return kTop + (1.0 - (y - y_lo_) / (y_hi_ - y_lo_)) * plot_h(); }
  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  void header(std::ostream& os, const std::string& title) const {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
       << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
       << "</text>\n";
  }

  void axes(std::ostream& os, const std::string& x_label, const std::string& y_label, int y_ticks = 5) const {
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h()) << "\" x2=\"" << num(kLeft + plot_w())
       << "\" y2=\"" << num(kTop + plot_h()) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
       << num(kTop + plot_h()) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= y_ticks; ++k) {
      const double v = y_lo_ + (y_hi_ - y_lo_) * k / y_ticks;
      os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
         << fmt_num(v) << "</text>\n";
    }
    os << "<text x=\"" << num(kLeft + plot_w() / 2) << "\" y=\"" << num(kHeight - 15)
       << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label) << "</text>\n";
    os << "<text x=\"18\" y=\"" << num(kTop + plot_h() / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
       << "transform=\"rotate(-90 18 " << num(kTop + plot_h() / 2) << ")\">" << escape(y_label) << "</text>\n";
  }

  void x_ticks(std::ostream& os, int ticks = 5) const {
    for (int k = 0; k <= ticks; ++k) {
      const double v = x_lo_ + (x_hi_ - x_lo_) * k / ticks;
      os << "<text x=\"" << num(px(v)) << "\" y=\"" << num(kTop + plot_h() + 16)
         << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_num(v) << "</text>\n";
    }
  }

  static void legend(std::ostream& os, const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double y = kTop + 10 + 18.0 * double(i);
      os << "<rect x=\"" << num(kWidth - kRight + 15) << "\" y=\"" << num(y - 9) << "\" width=\"10\" height=\"10\" fill=\""
         << palette(i) << "\"/>\n";
      os << "<text x=\"" << num(kWidth - kRight + 30) << "\" y=\"" << num(y) << "\" font-size=\"12\">"
         << escape(names[i]) << "</text>\n";
    }
  }

 private:
  double x_lo_, x_hi_, y_lo_, y_hi_;
};

// Fronts in (filling ratio, lead time) space, one colour per method, with the
// dominated-region staircase of each front.
inline void pareto_scatter(std::ostream& os, const FrontComparison& cmp, const std::string& title) {
  const double y_hi = std::max(cmp.l_max, 1.0);
  Canvas c(0.0, 1.0, 0.0, y_hi);
  c.header(os, title);
  c.axes(os, "filling ratio (maximize)", "lead time (minimize)");
  c.x_ticks(os);
  std::vector<std::string> names;
  for (std::size_t m = 0; m < cmp.methods.size(); ++m) {
    const auto& r = cmp.methods[m];
    names.push_back(r.method);
    if (r.front.empty()) continue;
    // Front is sorted by fill descending; walk from the best lead to the best fill.
    std::string path = "M " + num(c.px(0.0)) + ' ' + num(c.py(r.front.back().lead_time));
    for (auto it = r.front.rbegin(); it != r.front.rend(); ++it) {
      path += " L " + num(c.px(it->filling_ratio)) + ' ' + num(c.py(it->lead_time));
      const auto next = std::next(it);
      if (next != r.front.rend()) path += " L " + num(c.px(it->filling_ratio)) + ' ' + num(c.py(next->lead_time));
    }
    path += " L " + num(c.px(r.front.front().filling_ratio)) + ' ' + num(c.py(y_hi));
    os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << palette(m) << "\" stroke-width=\"1.5\"/>\n";
    for (const auto& p : r.front)
      os << "<circle cx=\"" << num(c.px(p.filling_ratio)) << "\" cy=\"" << num(c.py(p.lead_time))
         << "\" r=\"4\" fill=\"" << palette(m) << "\"/>\n";
  }
  Canvas::legend(os, names);
  os << "</svg>\n";
}

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series
};

// Grouped bars; negative values hang below the zero line.
inline void grouped_bars(std::ostream& os, const std::vector<BarGroup>& groups, const std::vector<std::string>& series,
                         const std::string& title, const std::string& x_label, const std::string& y_label) {
  double lo = 0.0, hi = 0.0;
  for (const auto& g : groups)
    for (double v : g.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi == lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  Canvas c(0.0, double(std::max<std::size_t>(groups.size(), 1)), lo < 0.0 ? lo - pad : 0.0, hi + pad);
  c.header(os, title);
  c.axes(os, x_label, y_label);
  const double group_w = Canvas::plot_w() / double(std::max<std::size_t>(groups.size(), 1));
  const double bar_w = 0.8 * group_w / double(std::max<std::size_t>(series.size(), 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = kLeft + group_w * double(g) + 0.1 * group_w;
    for (std::size_t s = 0; s < groups[g].values.size(); ++s) {
      const double v = groups[g].values[s];
      const double top = c.py(std::max(v, 0.0));
      const double bottom = c.py(std::min(v, 0.0));
      os << "<rect x=\"" << num(x0 + bar_w * double(s)) << "\" y=\"" << num(top) << "\" width=\"" << num(bar_w)
         << "\" height=\"" << num(bottom - top) << "\" fill=\"" << palette(s) << "\"/>\n";
    }
    os << "<text x=\"" << num(kLeft + group_w * (double(g) + 0.5)) << "\" y=\"" << num(kTop + Canvas::plot_h() + 16)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(groups[g].label) << "</text>\n";
  }
  if (lo < 0.0)
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(c.py(0.0)) << "\" x2=\"" << num(kLeft + Canvas::plot_w())
       << "\" y2=\"" << num(c.py(0.0)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  Canvas::legend(os, series);
  os << "</svg>\n";
}

}  // namespace hyplan::svg
