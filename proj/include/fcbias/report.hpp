#pragma once

// SVG rendering. Output is a pure function of the input rows and the spec:
// coordinates are printed with 2 decimals and nothing time-dependent is
// embedded.

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fcbias/bootstrap.hpp"
#include "fcbias/polarity.hpp"

namespace fcbias {

enum class ReportFormat { csv, json, svg };

struct ReportSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double y_min = -1;  // distribution charts only; polarity charts always span [-1, 1]
  double y_max = 1;
};

namespace svg {

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  return s == "-0.00" ? "0.00" : s;
}

inline constexpr const char* kPalette[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52",
                                           "#8172B3", "#937860", "#DA8BC3", "#8C8C8C"};

inline std::string header(double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
}

inline std::string text(double x, double y, std::string_view body, const char* anchor = "middle",
                        const char* extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\"" + extra + ">" +
         escape(body) + "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const char* attrs) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" " +
         attrs + "/>\n";
}

inline std::string placeholder(const ReportSpec& spec, std::string_view message) {
  std::string out = header(480, 120);
  out += text(240, 30, spec.title, "middle", " font-weight=\"bold\"");
  out += text(240, 70, message, "middle", " class=\"empty\"");
  out += "</svg>\n";
  return out;
}

}  // namespace svg

/// Polarity chart layout. The y axis maps PS in [-1, 1] onto
/// [kPlotTop, kPlotTop + 2 * kHalfAxis]; bars grow from the zero line.
struct PolarityChartLayout {
  static constexpr double kPlotTop = 50;
  static constexpr double kHalfAxis = 150;
  static constexpr double kZeroY = kPlotTop + kHalfAxis;
  static constexpr double kMarginLeft = 60;
  static constexpr double kBarWidth = 18;
  static constexpr double kGroupGap = 24;
};

/// Grouped bars: one group per entity, one bar per organization, error bars of
/// half-length delta_ps. Rows are grouped in first-appearance order of entities
/// and sorted organization order within a group.
inline std::string render_polarity_chart(const std::vector<PolarityResult>& rows, const ReportSpec& spec) {
  using L = PolarityChartLayout;
  if (rows.empty()) return svg::placeholder(spec, "no polarity rows to display");
  for (const auto& r : rows) {
    if (!(r.ps >= -1 && r.ps <= 1)) throw std::invalid_argument("polarity chart: ps outside [-1, 1]");
    if (!(r.delta_ps >= 0)) throw std::invalid_argument("polarity chart: negative delta_ps");
  }

  std::vector<std::string> entities;
  std::set<std::string> orgs;
  for (const auto& r : rows) {
    if (std::find(entities.begin(), entities.end(), r.counts.entity) == entities.end())
      entities.push_back(r.counts.entity);
    orgs.insert(r.counts.org);
  }
  const std::vector<std::string> org_list(orgs.begin(), orgs.end());
  auto color = [&](const std::string& org) {
    const auto i = static_cast<std::size_t>(std::find(org_list.begin(), org_list.end(), org) - org_list.begin());
    return svg::kPalette[i % std::size(svg::kPalette)];
  };

  std::map<std::string, std::vector<const PolarityResult*>> groups;
  for (const auto& r : rows) groups[r.counts.entity].push_back(&r);
  for (auto& [e, g] : groups)
    std::stable_sort(g.begin(), g.end(), [](auto* a, auto* b) { return a->counts.org < b->counts.org; });

  double x = L::kMarginLeft + L::kGroupGap / 2;
  std::vector<std::pair<double, double>> group_spans;
  for (const auto& e : entities) {
    const double w = static_cast<double>(groups[e].size()) * L::kBarWidth;
    group_spans.emplace_back(x, w);
    x += w + L::kGroupGap;
  }
  const double plot_right = x - L::kGroupGap / 2;
  const double legend_x = plot_right + 20;
  const double width = legend_x + 160;
  const double height = L::kPlotTop + 2 * L::kHalfAxis + 110;
  auto y_of = [](double v) { return L::kZeroY - v * L::kHalfAxis; };

  std::string out = svg::header(width, height);
  out += svg::text(width / 2, 24, spec.title, "middle", " font-weight=\"bold\"");
  for (double tick : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    out += svg::line(L::kMarginLeft, y_of(tick), plot_right, y_of(tick),
                     tick == 0 ? "stroke=\"#000\" stroke-width=\"1\"" : "stroke=\"#ddd\" stroke-width=\"1\"");
    out += svg::text(L::kMarginLeft - 6, y_of(tick) + 4, svg::num(tick), "end");
  }
  out += svg::line(L::kMarginLeft, y_of(1), L::kMarginLeft, y_of(-1), "stroke=\"#000\" stroke-width=\"1\"");
  if (!spec.y_label.empty()) {
    out += "<text x=\"16\" y=\"" + svg::num(L::kZeroY) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           svg::num(L::kZeroY) + ")\">" + svg::escape(spec.y_label) + "</text>\n";
  }

  for (std::size_t gi = 0; gi < entities.size(); ++gi) {
    const auto& e = entities[gi];
    const auto [gx, gw] = group_spans[gi];
    double bx = gx;
    for (const PolarityResult* r : groups[e]) {
      const double top = y_of(std::max(r->ps, 0.0));
      const double h = std::abs(r->ps) * L::kHalfAxis;
      out += "<rect class=\"bar\" data-org=\"" + svg::escape(r->counts.org) + "\" data-entity=\"" + svg::escape(e) +
             "\" data-period=\"" + svg::escape(r->counts.period) + "\" x=\"" + svg::num(bx + 2) + "\" y=\"" +
             svg::num(top) + "\" width=\"" + svg::num(L::kBarWidth - 4) + "\" height=\"" + svg::num(h) +
             "\" fill=\"" + color(r->counts.org) + "\"/>\n";
      const double cx = bx + L::kBarWidth / 2;
      out += svg::line(cx, y_of(r->ps + r->delta_ps), cx, y_of(r->ps - r->delta_ps),
                       "class=\"errorbar\" stroke=\"#222\" stroke-width=\"1.5\"");
      bx += L::kBarWidth;
    }
    const double label_x = gx + gw / 2;
    const double label_y = y_of(-1) + 16;
    out += "<text x=\"" + svg::num(label_x) + "\" y=\"" + svg::num(label_y) +
           "\" text-anchor=\"end\" transform=\"rotate(-35 " + svg::num(label_x) + " " + svg::num(label_y) + ")\">" +
           svg::escape(e) + "</text>\n";
  }
  if (!spec.x_label.empty()) out += svg::text((L::kMarginLeft + plot_right) / 2, height - 10, spec.x_label);

  double ly = L::kPlotTop;
  for (const auto& org : org_list) {
    out += "<rect x=\"" + svg::num(legend_x) + "\" y=\"" + svg::num(ly - 10) + "\" width=\"12\" height=\"12\" fill=\"" +
           color(org) + "\"/>\n";
    out += svg::text(legend_x + 18, ly, org, "start");
    ly += 18;
  }
  out += "</svg>\n";
  return out;
}

/// A labelled sample rendered as one box in a distribution chart.
struct Distribution {
  std::string label;
  std::vector<double> values;
};

/// Box-and-whisker summary per group: whiskers at min/max, box at the
/// quartiles, a line at the median, and n printed below.
inline std::string render_distribution_chart(const std::vector<Distribution>& groups, const ReportSpec& spec) {
  std::vector<const Distribution*> nonempty;
  for (const auto& g : groups)
    if (!g.values.empty()) nonempty.push_back(&g);
  if (nonempty.empty()) return svg::placeholder(spec, "no values to display");
  if (!(spec.y_max > spec.y_min)) throw std::invalid_argument("distribution chart: y_max must exceed y_min");

  constexpr double top = 50, plot_h = 300, left = 60, box_w = 36, gap = 28;
  const double width = left + static_cast<double>(nonempty.size()) * (box_w + gap) + gap;
  const double height = top + plot_h + 110;
  auto y_of = [&](double v) {
    const double c = std::clamp(v, spec.y_min, spec.y_max);
    return top + (spec.y_max - c) / (spec.y_max - spec.y_min) * plot_h;
  };

  std::string out = svg::header(width, height);
  out += svg::text(width / 2, 24, spec.title, "middle", " font-weight=\"bold\"");
  for (int i = 0; i <= 4; ++i) {
    const double v = spec.y_min + (spec.y_max - spec.y_min) * i / 4.0;
    out += svg::line(left, y_of(v), width - gap / 2, y_of(v), "stroke=\"#ddd\" stroke-width=\"1\"");
    out += svg::text(left - 6, y_of(v) + 4, svg::num(v), "end");
  }
  if (!spec.y_label.empty()) {
    const double cy = top + plot_h / 2;
    out += "<text x=\"16\" y=\"" + svg::num(cy) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + svg::num(cy) +
           ")\">" + svg::escape(spec.y_label) + "</text>\n";
  }

  double x = left + gap;
  std::size_t i = 0;
  for (const Distribution* g : nonempty) {
    std::vector<double> v = g->values;
    std::sort(v.begin(), v.end());
    const double q1 = quantile_sorted(v, 0.25), q2 = quantile_sorted(v, 0.5), q3 = quantile_sorted(v, 0.75);
    const double cx = x + box_w / 2;
    const char* fill = svg::kPalette[i++ % std::size(svg::kPalette)];
    out += svg::line(cx, y_of(v.back()), cx, y_of(v.front()), "stroke=\"#222\" stroke-width=\"1\"");
    out += "<rect class=\"box\" data-label=\"" + svg::escape(g->label) + "\" x=\"" + svg::num(x) + "\" y=\"" +
           svg::num(y_of(q3)) + "\" width=\"" + svg::num(box_w) + "\" height=\"" + svg::num(y_of(q1) - y_of(q3)) +
           "\" fill=\"" + fill + "\" fill-opacity=\"0.7\" stroke=\"#222\"/>\n";
    out += svg::line(x, y_of(q2), x + box_w, y_of(q2), "class=\"median\" stroke=\"#000\" stroke-width=\"2\"");
    const double ly = top + plot_h + 16;
    out += "<text x=\"" + svg::num(cx) + "\" y=\"" + svg::num(ly) + "\" text-anchor=\"end\" transform=\"rotate(-35 " +
           svg::num(cx) + " " + svg::num(ly) + ")\">" + svg::escape(g->label) + "</text>\n";
    out += svg::text(cx, top - 6, "n=" + std::to_string(v.size()), "middle", " font-size=\"10\"");
    x += box_w + gap;
  }
  if (!spec.x_label.empty()) out += svg::text(width / 2, height - 10, spec.x_label);
  out += "</svg>\n";
  return out;
}

}  // namespace fcbias
