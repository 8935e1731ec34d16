#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fractrace/linalg.hpp"

namespace fractrace {

/// Shortest decimal that parses back to exactly x ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_double(double x);

/// Parses a double from the whole string; throws InvalidParam otherwise.
double parse_double(std::string_view s);

/// "a,b,c" -> vector.
Vector parse_vector(std::string_view s);

/// Rows separated by ';', entries by ','. Throws InvalidParam on ragged or
/// non-square input.
RealMatrix parse_matrix(std::string_view s);

/// "lo:hi" with lo < hi.
std::pair<double, double> parse_range(std::string_view s);

/// Comma-separated output with a header row and LF line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);

  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(std::string_view s);
  void end_row();

 private:
  void sep();

  std::ostream& os_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

/// Split one CSV line on commas (no quoting is ever emitted).
std::vector<std::string> split_csv_line(std::string_view line);

struct Polyline {
  std::vector<std::pair<double, double>> points;
  std::string color = "#000000";
  double width = 1.5;
};

/// Fixed 800x600 SVG with autoscaled axes; one polyline per curve.
class SvgPlot {
 public:
  explicit SvgPlot(std::string title = "") : title_(std::move(title)) {}

  void add(Polyline line) { lines_.push_back(std::move(line)); }
  void add_marker(double x, double y, std::string color);
  void write(std::ostream& os) const;

 private:
  std::string title_;
  std::vector<Polyline> lines_;
  std::vector<std::pair<std::pair<double, double>, std::string>> markers_;
};

}  // namespace fractrace
