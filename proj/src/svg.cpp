#include "corpusmix/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace corpusmix::svg {
namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string heatmap(const OverlapMatrix& matrix, const std::string& title) {
  const int cell = 56, left = 140, top = 60;
  const int n = static_cast<int>(matrix.domains.size());
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + n * cell + 20 << "\" height=\""
      << top + n * cell + 20 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (int j = 0; j < n; ++j)
    out << "<text x=\"" << left + j * cell + cell / 2 << "\" y=\"" << top - 6
        << "\" text-anchor=\"middle\">" << escape(matrix.domains[j]) << "</text>\n";
  for (int i = 0; i < n; ++i) {
    out << "<text x=\"" << left - 6 << "\" y=\"" << top + i * cell + cell / 2 + 4
        << "\" text-anchor=\"end\">" << escape(matrix.domains[i]) << "</text>\n";
    for (int j = 0; j < n; ++j) {
      const bool ok = matrix.defined[i];
      const double v = ok ? matrix.cells[i][j] : 0.0;
      const int shade = ok ? 255 - static_cast<int>(std::lround(v / 100.0 * 200.0)) : 230;
      out << "<rect x=\"" << left + j * cell << "\" y=\"" << top + i * cell << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << "," << shade << ",255)\" stroke=\"white\"/>\n";
      out << "<text x=\"" << left + j * cell + cell / 2 << "\" y=\"" << top + i * cell + cell / 2 + 4
          << "\" text-anchor=\"middle\">" << (ok ? fixed(v, 1) : std::string("n/a")) << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values) {
  const int bar = 36, gap = 10, left = 50, top = 40, height = 200;
  const int n = static_cast<int>(values.size());
  double peak = 0;
  for (const double v : values) peak = std::max(peak, v);
  if (peak <= 0) peak = 1;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + n * (bar + gap) + 20 << "\" height=\""
      << top + height + 50 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + height << "\" x2=\"" << left + n * (bar + gap)
      << "\" y2=\"" << top + height << "\" stroke=\"black\"/>\n";
  for (int i = 0; i < n; ++i) {
    const int h = static_cast<int>(std::lround(values[i] / peak * height));
    const int x = left + i * (bar + gap);
    out << "<rect x=\"" << x << "\" y=\"" << top + height - h << "\" width=\"" << bar << "\" height=\"" << h
        << "\" fill=\"steelblue\"/>\n";
    out << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + height - h - 4 << "\" text-anchor=\"middle\">"
        << fixed(values[i], 3) << "</text>\n";
    out << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + height + 16 << "\" text-anchor=\"middle\">"
        << escape(i < static_cast<int>(labels.size()) ? labels[i] : std::string()) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace corpusmix::svg
