// Standalone SVG line plots.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace shocklab {

struct SvgSeries {
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  std::string label;
  double width = 1.5;
  bool dashed = false;
  bool points = false;  // draw markers instead of a polyline
};

struct SvgLabel {
  double x, y;
  std::string text;
};

class SvgPlot {
 public:
  std::string title, xlabel, ylabel;
  bool log_y = false;
  int width = 720, height = 480;

  void add(SvgSeries s) { series_.push_back(std::move(s)); }
  void label(double x, double y, std::string t) { labels_.push_back({x, y, std::move(t)}); }

  std::string render() const {
    double x0 = inf(), x1 = -inf(), y0 = inf(), y1 = -inf();
    for (const auto& s : series_)
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        double y = ty(s.y[k]);
        if (!std::isfinite(y) || !std::isfinite(s.x[k])) continue;
        x0 = std::min(x0, s.x[k]);
        x1 = std::max(x1, s.x[k]);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
    if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
    double py = 0.05 * (y1 - y0);
    y0 -= py;
    y1 += py;
    const double L = 70, R = 20, T = 40, B = 50;
    const double W = width - L - R, H = height - T - B;
    auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * W; };
    auto Y = [&](double y) { return T + (1 - (ty(y) - y0) / (y1 - y0)) * H; };
    std::string o;
    o += fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
             width, height, width, height);
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += fmt("<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T, W, H);
    for (int k = 0; k <= 4; ++k) {
      double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
      double xp = L + W * k / 4.0, yp = T + H * (1 - k / 4.0);
      o += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\">%s</text>\n", xp, T + H + 16,
               num(xv).c_str());
      o += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%s</text>\n", L - 4, yp + 4,
               num(log_y ? std::pow(10.0, yv) : yv).c_str());
    }
    o += fmt("<text x=\"%.2f\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">%s</text>\n", L + W / 2,
             esc(title).c_str());
    o += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n", L + W / 2,
             T + H + 38, esc(xlabel).c_str());
    o += fmt("<text x=\"14\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 %.2f)\">%s</text>\n",
             T + H / 2, T + H / 2, esc(ylabel).c_str());
    int legend = 0;
    for (const auto& s : series_) {
      if (s.points) {
        for (std::size_t k = 0; k < s.x.size(); ++k) {
          if (!std::isfinite(ty(s.y[k]))) continue;
          o += fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", X(s.x[k]), Y(s.y[k]), s.color.c_str());
        }
      } else {
        o += fmt("<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"%g\"%s points=\"", s.color.c_str(), s.width,
                 s.dashed ? " stroke-dasharray=\"5,4\"" : "");
        for (std::size_t k = 0; k < s.x.size(); ++k) {
          if (!std::isfinite(ty(s.y[k]))) continue;
          o += fmt("%.2f,%.2f ", X(s.x[k]), Y(s.y[k]));
        }
        o += "\"/>\n";
      }
      if (!s.label.empty()) {
        double ly = T + 14 + 16 * legend++;
        o += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"2\"/>\n",
                 L + W - 150, ly - 4, L + W - 130, ly - 4, s.color.c_str());
        o += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\">%s</text>\n", L + W - 125, ly, esc(s.label).c_str());
      }
    }
    for (const auto& l : labels_)
      o += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" fill=\"#444\">%s</text>\n", X(l.x) + 3, Y(l.y) - 3,
               esc(l.text).c_str());
    o += "</svg>\n";
    return o;
  }

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }
  double ty(double y) const { return log_y ? (y > 0 ? std::log10(y) : -inf()) : y; }
  template <class... A>
  static std::string fmt(const char* f, A... a) {
    int n = std::snprintf(nullptr, 0, f, a...);
    std::string s(static_cast<std::size_t>(n), '\0');
    std::snprintf(s.data(), s.size() + 1, f, a...);
    return s;
  }
  static std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
  }
  static std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  }
  std::vector<SvgSeries> series_;
  std::vector<SvgLabel> labels_;
};

}  // namespace shocklab
