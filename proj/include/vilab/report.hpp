#pragma once

#include <filesystem>
#include <type_traits>
#include <string>
#include <vector>

namespace vilab {

/// Writes via a sibling temp file and rename, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip representation of a double.
std::string format_number(double value);

/// Accumulates CSV text with a fixed header.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  template <class... Fields>
  void row(const Fields&... fields) {
    std::string line;
    (append(line, fields), ...);
    line.back() = '\n';
    text_ += line;
  }

  [[nodiscard]] const std::string& str() const { return text_; }

 private:
  static void append(std::string& line, const std::string& s) { line += s + ","; }
  static void append(std::string& line, const char* s) { line += std::string(s) + ","; }
  static void append(std::string& line, double v) { line += format_number(v) + ","; }
  template <class Int, class = std::enable_if_t<std::is_integral_v<Int>>>
  static void append(std::string& line, Int v) {
    line += std::to_string(v) + ",";
  }

  std::string text_;
};

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained log-log scatter chart with an optional fitted line
/// y = exp(intercept)·x^slope.
std::string loglog_svg(const std::string& title, const SvgSeries& points, bool with_fit, double slope,
                       double intercept);

}  // namespace vilab
