#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hcb/common.hpp"
#include "hcb/io.hpp"

namespace hcb::svg {

struct Series {
  enum class Kind { Points, Line, Band };
  Kind kind = Kind::Points;
  std::vector<double> x, y;
  std::vector<double> y_low, y_high;  // Band only
  std::vector<double> opacity;        // Points only; empty means opaque
  std::string color = "#1f77b4";
  std::string label;
  double radius = 2.0;
};

struct Panel {
  std::string title;
  std::string x_label, y_label;
  std::vector<Series> series;
};

struct Figure {
  std::string title;
  std::vector<Panel> panels;
  int columns = 1;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

inline Range padded(double lo, double hi) {
  if (!(lo <= hi)) return {0.0, 1.0};
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  return {lo - pad, hi + pad};
}

inline std::vector<double> ticks(Range r) {
  const double span = r.hi - r.lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0})
    if (f * mag >= raw) {
      step = f * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step) out.push_back(t);
  return out;
}

inline std::pair<Range, Range> data_ranges(const Panel& p) {
  double xl = INFINITY, xh = -INFINITY, yl = INFINITY, yh = -INFINITY;
  auto take = [](double v, double& lo, double& hi) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const Series& s : p.series) {
    for (double v : s.x) take(v, xl, xh);
    for (double v : s.y) take(v, yl, yh);
    for (double v : s.y_low) take(v, yl, yh);
    for (double v : s.y_high) take(v, yl, yh);
  }
  return {padded(xl, xh), padded(yl, yh)};
}

}  // namespace detail

constexpr int kPanelWidth = 380;
constexpr int kPanelHeight = 300;

/// Deterministic SVG: fixed layout, fixed number formatting, no timestamps.
inline std::string render(const Figure& fig) {
  using namespace detail;
  const int cols = std::max(1, fig.columns);
  const int n_panels = std::max<int>(1, int(fig.panels.size()));
  const int rows = (n_panels + cols - 1) / cols;
  const int title_h = fig.title.empty() ? 0 : 28;
  const int width = cols * kPanelWidth, height = rows * kPanelHeight + title_h;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (!fig.title.empty())
    os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << escape(fig.title)
       << "</text>\n";

  std::vector<Panel> panels = fig.panels;
  if (panels.empty()) panels.emplace_back();
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const Panel& p = panels[k];
    const double ox = double(int(k) % cols) * kPanelWidth, oy = title_h + double(int(k) / cols) * kPanelHeight;
    const double left = ox + 62, right = ox + kPanelWidth - 16, top = oy + 26, bottom = oy + kPanelHeight - 44;
    const auto [xr, yr] = data_ranges(p);
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * (right - left); };
    auto py = [&](double y) { return bottom - (y - yr.lo) / (yr.hi - yr.lo) * (bottom - top); };

    os << "<g>\n";
    if (!p.title.empty())
      os << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(oy + 16) << "\" text-anchor=\"middle\">"
         << escape(p.title) << "</text>\n";
    os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left) << "\" height=\""
       << num(bottom - top) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(xr)) {
      os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(px(t)) << "\" y2=\""
         << num(bottom + 4) << "\" stroke=\"black\"/>";
      os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(bottom + 15) << "\" text-anchor=\"middle\">"
         << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(yr)) {
      os << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left) << "\" y2=\""
         << num(py(t)) << "\" stroke=\"black\"/>";
      os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
         << tick_label(t) << "</text>\n";
    }
    os << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(bottom + 34)
       << "\" text-anchor=\"middle\">" << escape(p.x_label) << "</text>\n";
    os << "<text transform=\"translate(" << num(ox + 16) << ' ' << num((top + bottom) / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << escape(p.y_label) << "</text>\n";

    os << "<clipPath id=\"clip" << k << "\"><rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
       << num(right - left) << "\" height=\"" << num(bottom - top) << "\"/></clipPath>\n";
    os << "<g clip-path=\"url(#clip" << k << ")\">\n";
    for (const Series& s : p.series) {
      switch (s.kind) {
        case Series::Kind::Band: {
          if (s.x.empty()) break;
          os << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
          for (std::size_t i = 0; i < s.x.size(); ++i) os << num(px(s.x[i])) << ',' << num(py(s.y_high[i])) << ' ';
          for (std::size_t i = s.x.size(); i-- > 0;) os << num(px(s.x[i])) << ',' << num(py(s.y_low[i])) << ' ';
          os << "\"/>\n";
          break;
        }
        case Series::Kind::Line: {
          if (s.x.empty()) break;
          os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
          for (std::size_t i = 0; i < s.x.size(); ++i) os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
          os << "\"/>\n";
          for (std::size_t i = 0; i < s.x.size(); ++i)
            os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\""
               << s.color << "\"/>\n";
          break;
        }
        case Series::Kind::Points: {
          for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"" << num(s.radius)
               << "\" fill=\"" << s.color << '"';
            if (!s.opacity.empty()) os << " fill-opacity=\"" << num(std::clamp(s.opacity[i], 0.0, 1.0)) << '"';
            os << "/>\n";
          }
          break;
        }
      }
    }
    os << "</g>\n";
    int row = 0;
    for (const Series& s : p.series) {
      if (s.label.empty()) continue;
      const double ly = top + 12 + 13 * row++;
      os << "<rect x=\"" << num(right - 110) << "\" y=\"" << num(ly - 8) << "\" width=\"9\" height=\"9\" fill=\""
         << s.color << "\"/><text x=\"" << num(right - 97) << "\" y=\"" << num(ly) << "\">" << escape(s.label)
         << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Figure layouts produced by the experiment runner.
enum class FigureKind { Spectrum, EigenstateXi, EigenstateRatio, DisorderSweep, Overlap, PrepXi, PrepRatio, Circuit };

inline const std::vector<std::string>& required_columns(FigureKind kind) {
  static const std::map<FigureKind, std::vector<std::string>> cols{
      {FigureKind::Spectrum, {"n", "epsilon_over_J"}},
      {FigureKind::EigenstateXi, {"n", "epsilon_over_J", "xi"}},
      {FigureKind::EigenstateRatio, {"n", "epsilon_over_J", "ratio"}},
      {FigureKind::DisorderSweep, {"spread_over_J", "mean_ratio", "std_ratio"}},
      {FigureKind::Overlap, {"source", "delta_over_J", "g_tilde_over_J", "time_over_J", "n", "epsilon_over_J", "weight"}},
      {FigureKind::PrepXi, {"source", "delta_over_J", "xi"}},
      {FigureKind::PrepRatio, {"source", "delta_over_J", "ratio"}},
      {FigureKind::Circuit, {"C_P", "C_P_prime", "C_G", "C_eff_f", "ratio"}},
  };
  return cols.at(kind);
}

inline void check_schema(const io::Table& t, FigureKind kind) {
  for (const auto& c : required_columns(kind))
    if (!t.has(c)) throw DomainError("table does not match the figure kind: missing column '" + c + "'");
}

inline const std::string& palette(std::size_t k) {
  static const std::vector<std::string> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                               "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return colors[k % colors.size()];
}

namespace detail {

/// Rows grouped by the value of a numeric key, in ascending key order.
inline std::map<double, std::vector<std::size_t>> group_by(const io::Table& t, const std::string& key) {
  std::map<double, std::vector<std::size_t>> g;
  const auto col = t.column(key);
  for (std::size_t r = 0; r < col.size(); ++r) g[col[r]].push_back(r);
  return g;
}

inline std::map<std::string, std::vector<std::size_t>> group_by_text(const io::Table& t, const std::string& key) {
  std::map<std::string, std::vector<std::size_t>> g;
  const auto col = t.text_column(key);
  for (std::size_t r = 0; r < col.size(); ++r) g[col[r]].push_back(r);
  return g;
}

inline Panel eigen_panel(const io::Table& t, const std::string& y, const std::string& y_label, bool rescale,
                         const std::string& x_label) {
  Panel p;
  p.x_label = x_label;
  p.y_label = y_label;
  const auto eps = t.column("epsilon_over_J");
  const auto val = t.column(y);
  std::size_t c = 0;
  for (const auto& [n, rows] : group_by(t, "n")) {
    Series s;
    s.color = palette(c++);
    s.label = "n = " + tick_label(n);
    s.radius = 1.5;
    for (std::size_t r : rows) {
      s.x.push_back(rescale ? (n > 0 ? eps[r] / n : 0.0) : eps[r]);
      s.y.push_back(val[r]);
    }
    if (rescale) s.opacity.assign(s.x.size(), 0.35);
    p.series.push_back(std::move(s));
  }
  return p;
}

inline Figure prep_figure(const io::Table& t, const std::string& y, const std::string& y_label,
                          const io::Table* overlay) {
  Panel p;
  if (overlay) {
    check_schema(*overlay, y == "xi" ? FigureKind::EigenstateXi : FigureKind::EigenstateRatio);
    p = eigen_panel(*overlay, y, y_label, true, "");
    for (Series& s : p.series) s.color = "#b0b0b0", s.label.clear();
  }
  p.x_label = "delta / J  (eigenstates at epsilon / (n J))";
  p.y_label = y_label;
  const auto d = t.column("delta_over_J");
  const auto v = t.column(y);
  std::size_t c = 0;
  for (const auto& [src, rows] : group_by_text(t, "source")) {
    Series s;
    s.kind = Series::Kind::Line;
    s.color = c == 0 ? "#000000" : palette(c);
    ++c;
    s.label = src;
    std::vector<std::size_t> order = rows;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    for (std::size_t r : order) {
      s.x.push_back(d[r]);
      s.y.push_back(v[r]);
    }
    p.series.push_back(std::move(s));
  }
  return {"", {p}, 1};
}

}  // namespace detail

/// Renders a runner table. `overlay` carries eigenstate rows for the PrepXi
/// and PrepRatio kinds (plotted against epsilon / n); other kinds ignore it.
inline std::string render_svg(const io::Table& t, FigureKind kind, const io::Table* overlay = nullptr) {
  check_schema(t, kind);
  using detail::tick_label;
  switch (kind) {
    case FigureKind::Spectrum: {
      Panel p;
      p.x_label = "n (excitations)";
      p.y_label = "epsilon / J (rotating frame)";
      Series s;
      s.x = t.column("n");
      s.y = t.column("epsilon_over_J");
      s.radius = 1.2;
      s.opacity.assign(s.x.size(), 0.5);
      p.series.push_back(std::move(s));
      return render({"", {p}, 1});
    }
    case FigureKind::EigenstateXi:
      return render({"", {detail::eigen_panel(t, "xi", "correlation length xi (sites)", false, "epsilon / J")}, 1});
    case FigureKind::EigenstateRatio:
      return render({"", {detail::eigen_panel(t, "ratio", "s_V / s_A", false, "epsilon / J")}, 1});
    case FigureKind::DisorderSweep: {
      Panel p;
      p.x_label = "Delta omega / J";
      p.y_label = "(s_V/s_A at epsilon=0) / (s_V/s_A at edge)";
      const auto x = t.column("spread_over_J"), m = t.column("mean_ratio"), sd = t.column("std_ratio");
      std::vector<std::size_t> order(x.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
      Series band, line;
      band.kind = Series::Kind::Band;
      line.kind = Series::Kind::Line;
      band.color = line.color = "#1f77b4";
      line.label = "mean";
      for (std::size_t i : order) {
        band.x.push_back(x[i]);
        band.y_low.push_back(m[i] - sd[i]);
        band.y_high.push_back(m[i] + sd[i]);
        line.x.push_back(x[i]);
        line.y.push_back(m[i]);
      }
      p.series.push_back(std::move(band));
      p.series.push_back(std::move(line));
      return render({"", {p}, 1});
    }
    case FigureKind::Overlap: {
      using Key = std::tuple<std::string, double, double, double>;
      std::map<Key, std::vector<std::size_t>> groups;
      const auto src = t.text_column("source");
      const auto d = t.column("delta_over_J"), g = t.column("g_tilde_over_J"), tm = t.column("time_over_J");
      const auto n = t.column("n"), eps = t.column("epsilon_over_J"), w = t.column("weight");
      for (std::size_t r = 0; r < t.rows(); ++r) groups[{src[r], d[r], g[r], tm[r]}].push_back(r);
      Figure fig;
      fig.columns = std::min<int>(4, std::max<int>(1, int(groups.size())));
      for (const auto& [key, rows] : groups) {
        Panel p;
        p.title = std::get<0>(key) + ": delta=" + tick_label(std::get<1>(key)) + "J, g~=" +
                  tick_label(std::get<2>(key)) + "J, t=" + tick_label(std::get<3>(key)) + "/J";
        p.x_label = "n (excitations)";
        p.y_label = "epsilon / J";
        double wmax = 0.0;
        for (std::size_t r : rows) wmax = std::max(wmax, w[r]);
        Series s;
        s.color = "#08306b";
        s.radius = 1.8;
        double nmax = 0.0;
        for (std::size_t r : rows) {
          s.x.push_back(n[r]);
          s.y.push_back(eps[r]);
          s.opacity.push_back(wmax > 0 ? std::sqrt(w[r] / wmax) : 0.0);
          nmax = std::max(nmax, n[r]);
        }
        Series line;
        line.kind = Series::Kind::Line;
        line.color = "#d62728";
        line.label = "epsilon = n delta";
        line.x = {0.0, nmax};
        line.y = {0.0, nmax * std::get<1>(key)};
        p.series.push_back(std::move(s));
        p.series.push_back(std::move(line));
        fig.panels.push_back(std::move(p));
      }
      return render(fig);
    }
    case FigureKind::PrepXi:
      return render(detail::prep_figure(t, "xi", "correlation length xi (sites)", overlay));
    case FigureKind::PrepRatio:
      return render(detail::prep_figure(t, "ratio", "s_V / s_A", overlay));
    case FigureKind::Circuit: {
      Panel p;
      p.x_label = "C_P' / C_P";
      p.y_label = "C_eff / C_P";
      const auto cp = t.column("C_P"), cpp = t.column("C_P_prime"), ratio = t.column("ratio");
      std::size_t c = 0;
      for (const auto& [cg, rows] : detail::group_by(t, "C_G")) {
        Series s;
        s.kind = Series::Kind::Line;
        s.color = palette(c++);
        s.label = "C_G = " + tick_label(cg);
        for (std::size_t r : rows) {
          s.x.push_back(cpp[r] / cp[r]);
          s.y.push_back(ratio[r]);
        }
        p.series.push_back(std::move(s));
      }
      return render({"", {p}, 1});
    }
  }
  throw DomainError("unknown figure kind");
}

}  // namespace hcb::svg
