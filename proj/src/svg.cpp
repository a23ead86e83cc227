#include "eeval/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eeval {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
constexpr int kPaletteSize = 8;

constexpr double kPanelW = 440.0;
constexpr double kPanelH = 330.0;
constexpr double kMarginLeft = 62.0;
constexpr double kMarginBottom = 46.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginRight = 16.0;
constexpr double kPanelGap = 24.0;

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    const double span = hi - lo;
    const double p = span > 0 ? span * 0.05 : std::max(std::abs(hi), 1.0) * 0.05;
    lo -= p;
    hi += p;
  }
};

Range empty_range() { return Range{1e300, -1e300}; }

std::vector<double> nice_ticks(const Range& r, int target = 6) {
  const double span = r.hi - r.lo;
  if (!(span > 0)) return {r.lo};
  const double raw_step = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw_step) {
      step = mag * mult;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(r.lo / step) * step;
  for (; t <= r.hi + step * 1e-9; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

class Panel {
 public:
  Panel(std::ostringstream& out, double origin_x, Range x, Range y,
        const std::string& x_label, const std::string& y_label)
      : out_(out), ox_(origin_x), x_(x), y_(y) {
    const double left = ox_ + kMarginLeft;
    const double right = ox_ + kPanelW - kMarginRight;
    const double top = kMarginTop;
    const double bottom = kPanelH - kMarginBottom;

    out_ << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
         << fmt(right - left) << "\" height=\"" << fmt(bottom - top)
         << "\" fill=\"white\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

    for (double t : nice_ticks(x_)) {
      const double px = sx(t);
      out_ << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(bottom)
           << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(bottom + 4)
           << "\" stroke=\"#444444\"/>\n";
      out_ << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(bottom + 17)
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(t)
           << "</text>\n";
    }
    for (double t : nice_ticks(y_)) {
      const double py = sy(t);
      out_ << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(py)
           << "\" x2=\"" << fmt(left) << "\" y2=\"" << fmt(py)
           << "\" stroke=\"#444444\"/>\n";
      out_ << "<text x=\"" << fmt(left - 7) << "\" y=\"" << fmt(py + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(t)
           << "</text>\n";
    }
    out_ << "<text x=\"" << fmt((left + right) / 2) << "\" y=\""
         << fmt(kPanelH - 10)
         << "\" font-size=\"13\" text-anchor=\"middle\">"
         << xml_escape(x_label) << "</text>\n";
    out_ << "<text x=\"" << fmt(ox_ + 16) << "\" y=\""
         << fmt((top + bottom) / 2)
         << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 "
         << fmt(ox_ + 16) << " " << fmt((top + bottom) / 2) << ")\">"
         << xml_escape(y_label) << "</text>\n";
  }

  double sx(double v) const {
    const double left = ox_ + kMarginLeft;
    const double right = ox_ + kPanelW - kMarginRight;
    return left + (v - x_.lo) / (x_.hi - x_.lo) * (right - left);
  }
  double sy(double v) const {
    const double top = kMarginTop;
    const double bottom = kPanelH - kMarginBottom;
    return bottom - (v - y_.lo) / (y_.hi - y_.lo) * (bottom - top);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& color) {
    if (pts.empty()) return;
    out_ << "<polyline fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out_ << " ";
      out_ << fmt(sx(pts[i].first)) << "," << fmt(sy(pts[i].second));
    }
    out_ << "\"/>\n";
  }

  void dots(const std::vector<std::pair<double, double>>& pts,
            const std::string& color, double radius) {
    for (const auto& [x, y] : pts) {
      out_ << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y))
           << "\" r=\"" << fmt(radius) << "\" fill=\"" << color << "\"/>\n";
    }
  }

  void legend(const std::vector<std::string>& labels) {
    const double right = ox_ + kPanelW - kMarginRight;
    double y = kMarginTop + 14;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::string color = kPalette[i % kPaletteSize];
      out_ << "<line x1=\"" << fmt(right - 130) << "\" y1=\"" << fmt(y - 4)
           << "\" x2=\"" << fmt(right - 108) << "\" y2=\"" << fmt(y - 4)
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      out_ << "<text x=\"" << fmt(right - 102) << "\" y=\"" << fmt(y)
           << "\" font-size=\"11\">" << xml_escape(labels[i]) << "</text>\n";
      y += 15;
    }
  }

 private:
  std::ostringstream& out_;
  double ox_;
  Range x_;
  Range y_;
};

// Per-head values from the first q block; they repeat identically for
// every q, so one block is enough for the ECE/EEFP panels.
std::vector<CurveHeadRow> first_block(const ParsedCurve& curve) {
  std::vector<CurveHeadRow> rows;
  if (curve.heads.empty()) return rows;
  const double q0 = curve.heads.front().q;
  for (const auto& row : curve.heads) {
    if (row.q == q0) rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const CurveHeadRow& a, const CurveHeadRow& b) {
              return a.head < b.head;
            });
  return rows;
}

}  // namespace

std::string render_report_svg(const std::vector<ParsedCurve>& curves,
                              const std::vector<std::string>& labels) {
  if (curves.size() != labels.size()) {
    throw InvalidConfigError("svg: " + std::to_string(curves.size()) +
                             " curves but " + std::to_string(labels.size()) +
                             " labels");
  }
  if (curves.empty()) {
    throw InvalidConfigError("svg: no curves");
  }

  Range cost = empty_range();
  Range acc = empty_range();
  Range head_axis = empty_range();
  Range ece_axis = empty_range();
  Range eefp_axis = empty_range();
  for (const ParsedCurve& curve : curves) {
    for (const auto& row : curve.aggregate) {
      cost.include(row.mean_cost);
      acc.include(row.accuracy);
    }
    for (const auto& row : first_block(curve)) {
      head_axis.include(row.head);
      ece_axis.include(row.ece);
      acc.include(row.acc_head);
      if (row.eefp) eefp_axis.include(*row.eefp);
    }
    for (double c : curve.exit_costs) cost.include(c);
  }
  if (ece_axis.lo > ece_axis.hi) ece_axis = Range{0.0, 1.0};
  if (eefp_axis.lo > eefp_axis.hi) eefp_axis = Range{0.0, 1.0};
  ece_axis.include(0.0);
  cost.pad();
  acc.pad();
  ece_axis.pad();
  eefp_axis.pad();
  head_axis.lo -= 0.5;
  head_axis.hi += 0.5;

  const double total_w = 3 * kPanelW + 2 * kPanelGap;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(total_w)
      << "\" height=\"" << fmt(kPanelH) << "\" viewBox=\"0 0 " << fmt(total_w)
      << " " << fmt(kPanelH) << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"" << fmt(total_w) << "\" height=\"" << fmt(kPanelH)
      << "\" fill=\"white\"/>\n";

  {
    Panel panel(out, 0.0, cost, acc, "mean cost", "accuracy");
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const std::string color = kPalette[c % kPaletteSize];
      std::vector<std::pair<double, double>> line;
      for (const auto& row : curves[c].aggregate) {
        line.emplace_back(row.mean_cost, row.accuracy);
      }
      panel.polyline(line, color);
      if (!curves[c].exit_costs.empty()) {
        std::vector<std::pair<double, double>> marks;
        for (const auto& row : first_block(curves[c])) {
          const int idx = row.head - 1;
          if (idx >= 0 && idx < static_cast<int>(curves[c].exit_costs.size())) {
            marks.emplace_back(curves[c].exit_costs[idx], row.acc_head);
          }
        }
        panel.dots(marks, color, 3.0);
      }
    }
    panel.legend(labels);
  }

  {
    Panel panel(out, kPanelW + kPanelGap, head_axis, ece_axis, "head", "ECE");
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const std::string color = kPalette[c % kPaletteSize];
      std::vector<std::pair<double, double>> pts;
      for (const auto& row : first_block(curves[c])) {
        pts.emplace_back(row.head, row.ece);
      }
      panel.polyline(pts, color);
      panel.dots(pts, color, 2.5);
    }
    panel.legend(labels);
  }

  {
    Panel panel(out, 2 * (kPanelW + kPanelGap), head_axis, eefp_axis, "head",
                "EEFP");
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const std::string color = kPalette[c % kPaletteSize];
      std::vector<std::pair<double, double>> pts;
      for (const auto& row : first_block(curves[c])) {
        if (row.eefp) pts.emplace_back(row.head, *row.eefp);
      }
      panel.polyline(pts, color);
      panel.dots(pts, color, 2.5);
    }
    panel.legend(labels);
  }

  out << "</svg>\n";
  return out.str();
}

}  // namespace eeval
