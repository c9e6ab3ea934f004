#include "vilab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vilab/errors.hpp"

namespace vilab {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw InvalidArgument("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += "\n";
}

std::string loglog_svg(const std::string& title, const SvgSeries& points, bool with_fit, double slope,
                       double intercept) {
  constexpr double width = 640.0;
  constexpr double height = 420.0;
  constexpr double margin = 60.0;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < points.x.size(); ++i) {
    if (points.x[i] > 0.0 && points.y[i] > 0.0) {
      lx.push_back(std::log10(points.x[i]));
      ly.push_back(std::log10(points.y[i]));
    }
  }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\">" << title << "</text>\n";
  if (lx.empty()) {
    svg << "</svg>\n";
    return svg.str();
  }
  const double x0 = std::floor(*std::min_element(lx.begin(), lx.end()));
  const double x1 = std::max(x0 + 1.0, std::ceil(*std::max_element(lx.begin(), lx.end())));
  const double y0 = std::floor(*std::min_element(ly.begin(), ly.end()));
  const double y1 = std::max(y0 + 1.0, std::ceil(*std::max_element(ly.begin(), ly.end())));
  auto px = [&](double v) { return margin + (v - x0) / (x1 - x0) * (width - 2 * margin); };
  auto py = [&](double v) { return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin); };

  svg << "<g stroke=\"#888\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
      << height - margin << "\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
      << "\"/>\n</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double e = x0; e <= x1 + 1e-9; e += 1.0) {
    svg << "<text x=\"" << px(e) << "\" y=\"" << height - margin + 16 << "\" text-anchor=\"middle\">1e"
        << static_cast<int>(e) << "</text>\n";
  }
  for (double e = y0; e <= y1 + 1e-9; e += 1.0) {
    svg << "<text x=\"" << margin - 6 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e"
        << static_cast<int>(e) << "</text>\n";
  }
  svg << "</g>\n";
  if (with_fit) {
    // intercept is in natural-log units.
    const double ln10 = std::log(10.0);
    auto fit_y = [&](double l10x) { return (intercept + slope * l10x * ln10) / ln10; };
    svg << "<line stroke=\"#c33\" stroke-width=\"1.5\" x1=\"" << px(x0) << "\" y1=\"" << py(fit_y(x0))
        << "\" x2=\"" << px(x1) << "\" y2=\"" << py(fit_y(x1)) << "\"/>\n";
    svg << "<text x=\"" << width - margin << "\" y=\"" << margin - 10
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#c33\">slope "
        << format_number(std::round(slope * 1000.0) / 1000.0) << "</text>\n";
  }
  for (std::size_t i = 0; i < lx.size(); ++i) {
    svg << "<circle cx=\"" << px(lx[i]) << "\" cy=\"" << py(ly[i]) << "\" r=\"3.5\" fill=\"#236\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace vilab
