#include "svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hnhn::tools {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_line_svg(const std::filesystem::path& path, const LinePlot& plot,
                    std::span<const double> x, std::span<const double> y,
                    std::span<const double> err) {
  if (x.empty() || x.size() != y.size() || err.size() != y.size())
    throw std::invalid_argument("svg: x, y and err must be nonempty and equally long");

  auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  double xmin = *xmin_it, xmax = *xmax_it;
  double ymin = y[0] - err[0], ymax = y[0] + err[0];
  for (std::size_t i = 0; i < y.size(); ++i) {
    ymin = std::min(ymin, y[i] - err[i]);
    ymax = std::max(ymax, y[i] + err[i]);
  }
  if (xmax == xmin) { xmin -= 1; xmax += 1; }
  if (ymax == ymin) { ymin -= 0.05; ymax += 0.05; }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double v) { return kTop + (ymax - v) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(plot.title) << "</text>\n";

  // Axes.
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw
      << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + ph << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    out << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
        << num(yv) << "</text>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << sy(yv) << "\" x2=\"" << kLeft + pw
        << "\" y2=\"" << sy(yv) << "\" stroke=\"#ddd\"/>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 16
      << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n"
      << "<text transform=\"translate(18," << kTop + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t i = 0; i < x.size(); ++i) {
    out << "<line x1=\"" << sx(x[i]) << "\" y1=\"" << sy(y[i] - err[i]) << "\" x2=\""
        << sx(x[i]) << "\" y2=\"" << sy(y[i] + err[i]) << "\" stroke=\"#888\"/>\n";
  }
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) out << sx(x[i]) << ',' << sy(y[i]) << ' ';
  out << "\"/>\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << "<circle cx=\"" << sx(x[i]) << "\" cy=\"" << sy(y[i])
        << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  out << "</svg>\n";
}

}  // namespace hnhn::tools
