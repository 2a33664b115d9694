#include "subgd/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace subgd {

namespace {

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
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

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Resolves a metric name against plain and aggregated (`_median`) columns.
std::optional<std::string> find_column(const CsvTable& t, const std::string& name) {
  if (t.has(name)) return name;
  if (t.has(name + "_median")) return name + "_median";
  return std::nullopt;
}

double parse(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0' ? x : std::numeric_limits<double>::quiet_NaN();
}

void draw_panel(std::ostringstream& svg, const std::vector<Series>& series, const std::string& x_name,
                const std::string& y_name, const PlotStyle& st, int ox, bool legend) {
  const double W = st.panel_width, H = st.panel_height;
  const double left = 70, right = 20, top = 30, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  bool any_positive = false;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]) && s.y[i] > 0) any_positive = true;
    }
  }
  const bool log_y = st.log_y && any_positive;
  auto usable = [log_y](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_y || y > 0);
  };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      const double y = log_y ? std::log10(s.y[i]) : s.y[i];
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin <= xmax)) throw CsvError("plot: no finite data for " + y_name);
  if (st.marker && std::isfinite(*st.marker)) {
    xmin = std::min(xmin, *st.marker);
    xmax = std::max(xmax, *st.marker);
  }
  if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
  if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
  if (log_y) {
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
  }
  auto sx = [&](double x) { return ox + left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) {
    const double v = log_y ? std::log10(y) : y;
    return top + (1.0 - (v - ymin) / (ymax - ymin)) * ph;
  };

  svg << "<g>\n";
  svg << "<rect x=\"" << num(ox + left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#000\"/>\n";
  // y ticks
  const int ny = log_y ? static_cast<int>(ymax - ymin) : 4;
  for (int k = 0; k <= ny; ++k) {
    const double v = ymin + (ymax - ymin) * k / std::max(ny, 1);
    const double yy = top + (1.0 - (v - ymin) / (ymax - ymin)) * ph;
    const std::string label = log_y ? "1e" + std::to_string(static_cast<int>(std::lround(v))) : tick_label(v);
    svg << "<line x1=\"" << num(ox + left - 4) << "\" y1=\"" << num(yy) << "\" x2=\"" << num(ox + left)
        << "\" y2=\"" << num(yy) << "\" stroke=\"#000\"/>\n";
    svg << "<text x=\"" << num(ox + left - 6) << "\" y=\"" << num(yy + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << label << "</text>\n";
  }
  // x ticks
  for (int k = 0; k <= 4; ++k) {
    const double v = xmin + (xmax - xmin) * k / 4.0;
    svg << "<text x=\"" << num(sx(v)) << "\" y=\"" << num(top + ph + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
  }
  svg << "<text x=\"" << num(ox + left + pw / 2) << "\" y=\"" << num(H - 10)
      << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(x_name) << "</text>\n";
  svg << "<text x=\"" << num(ox + 16) << "\" y=\"" << num(top + ph / 2)
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 " << num(ox + 16) << " "
      << num(top + ph / 2) << ")\">" << escape(y_name) << (log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (usable(s.x[i], s.y[i])) pts.emplace_back(s.x[i], s.y[i]);
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    svg << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kColors[k % 10] << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) svg << ' ';
      svg << num(sx(pts[i].first)) << ',' << num(sy(pts[i].second));
    }
    svg << "\"/>\n";
  }

  if (st.marker && std::isfinite(*st.marker)) {
    const double mx = sx(*st.marker);
    svg << "<line x1=\"" << num(mx) << "\" y1=\"" << num(top) << "\" x2=\"" << num(mx) << "\" y2=\""
        << num(top + ph) << "\" stroke=\"#444\" stroke-dasharray=\"5,4\"/>\n";
    svg << "<text x=\"" << num(mx + 4) << "\" y=\"" << num(top + 12) << "\" font-size=\"11\">"
        << escape(st.marker_label) << "</text>\n";
  }

  if (legend && !(series.size() == 1 && series[0].name.empty())) {
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double ly = top + 14 + 16 * static_cast<double>(k);
      const double lx = ox + left + pw - 120;
      svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 20)
          << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << kColors[k % 10] << "\" stroke-width=\"2\"/>\n";
      svg << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly) << "\" font-size=\"11\">"
          << escape(series[k].name) << "</text>\n";
    }
  }
  svg << "</g>\n";
}

}  // namespace

std::string render_svg(const CsvTable& table, const PlotStyle& style) {
  if (table.rows.empty()) throw CsvError("plot: table has no data rows");
  const bool has_series = !table.header.empty() && table.header[0] == "series";
  const std::size_t first = has_series ? 1 : 0;

  std::string x_name = style.x_column;
  if (x_name.empty()) {
    for (std::size_t c = first; c < table.header.size(); ++c) {
      if (table.is_numeric(c)) {
        x_name = table.header[c];
        break;
      }
    }
  }
  if (x_name.empty()) throw CsvError("plot: no numeric column");
  const std::size_t xc = table.index(x_name);

  std::vector<std::string> ys;
  for (const auto& y : style.y_columns) {
    const auto c = find_column(table, y);
    if (!c) throw CsvError("plot: no column '" + y + "'");
    ys.push_back(*c);
  }
  if (ys.empty()) {
    const auto recon = find_column(table, "recon_norm");
    const auto off = find_column(table, "off_sub");
    if (recon) ys.push_back(*recon);
    if (off) ys.push_back(*off);
  }
  if (ys.empty()) {
    for (std::size_t c = first; c < table.header.size(); ++c) {
      if (c != xc && table.is_numeric(c)) {
        ys.push_back(table.header[c]);
        break;
      }
    }
  }
  if (ys.empty()) throw CsvError("plot: no numeric y column");

  const int W = style.panel_width * static_cast<int>(ys.size());
  const int H = style.panel_height;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t p = 0; p < ys.size(); ++p) {
    const std::size_t yc = table.index(ys[p]);
    std::vector<Series> series;
    for (const auto& row : table.rows) {
      const std::string name = has_series ? row[0] : "";
      auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
      if (it == series.end()) {
        series.push_back({name, {}, {}});
        it = series.end() - 1;
      }
      it->x.push_back(parse(row[xc]));
      it->y.push_back(parse(row[yc]));
    }
    draw_panel(svg, series, x_name, ys[p], style, style.panel_width * static_cast<int>(p), p == 0);
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg,
               const PlotStyle& style) {
  const std::string text = render_svg(read_csv(csv), style);
  std::ofstream os(svg);
  if (!os) throw CsvError("plot: cannot write " + svg.string());
  os << text;
}

}  // namespace subgd
