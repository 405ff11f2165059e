#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "quadrant/error.hpp"

namespace cli {

/// Shortest round-trip text for a finite double.
inline std::string num(double x) {
  if (!std::isfinite(x)) throw quadrant::NumericError("refusing to emit a non-finite value");
  return fmt::format("{}", x);
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> comments) : comments_(std::move(comments)) {}

  void header(std::vector<std::string> cols) { header_ = std::move(cols); }
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string text() const {
    std::string out;
    for (const auto& c : comments_) out += "# " + c + "\n";
    out += join(header_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

  void write(const std::string& path) const { write_file(path, text()); }

  static void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw quadrant::IoError("cannot open " + path + " for writing");
    f << body;
    if (!f) throw quadrant::IoError("write to " + path + " failed");
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + v[k];
    return s + "\n";
  }
  std::vector<std::string> comments_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Line plot with optional log10 y axis, written as plain path elements.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel, bool log_y)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)), log_y_(log_y) {}

  void series(std::string name, std::vector<double> x, std::vector<double> y) {
    series_.push_back({std::move(name), std::move(x), std::move(y)});
  }

  std::string text() const {
    constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series_)
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (!usable(s.y[k])) continue;
        x0 = std::min(x0, s.x[k]);
        x1 = std::max(x1, s.x[k]);
        y0 = std::min(y0, ty(s.y[k]));
        y1 = std::max(y1, ty(s.y[k]));
      }
    if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        W, H);
    s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
    s += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", W / 2, title_);
    s += fmt::format("<path d=\"M{} {} V{} H{}\" stroke=\"black\" fill=\"none\"/>\n", L, T, H - B, W - R);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (L + W - R) / 2, H - 12, xlabel_);
    s += fmt::format("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
                     (T + H - B) / 2, (T + H - B) / 2, ylabel_ + (log_y_ ? " (log10)" : ""));
    for (int k = 0; k <= 4; ++k) {
      const double yv = y0 + (y1 - y0) * k / 4, xv = x0 + (x1 - x0) * k / 4;
      s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", L - 6, py(yv) + 4, yv);
      s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n", px(xv), H - B + 16, xv);
    }
    for (std::size_t n = 0; n < series_.size(); ++n) {
      const auto& sr = series_[n];
      std::string d;
      for (std::size_t k = 0; k < sr.x.size(); ++k) {
        if (!usable(sr.y[k])) continue;
        d += fmt::format("{}{:.2f} {:.2f} ", d.empty() ? "M" : "L", px(sr.x[k]), py(ty(sr.y[k])));
      }
      const char* c = colors[n % 4];
      s += fmt::format("<path d=\"{}\" stroke=\"{}\" fill=\"none\" stroke-width=\"1.5\"/>\n", d, c);
      s += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", W - R - 150, T + 14 * (n + 1), c, sr.name);
    }
    return s + "</svg>\n";
  }

  void write(const std::string& path) const { Csv::write_file(path, text()); }

 private:
  struct Series {
    std::string name;
    std::vector<double> x, y;
  };
  bool usable(double y) const { return std::isfinite(y) && (!log_y_ || y > 0.0); }
  double ty(double y) const { return log_y_ ? std::log10(y) : y; }

  std::string title_, xlabel_, ylabel_;
  bool log_y_;
  std::vector<Series> series_;
};

}  // namespace cli
