#include "fractrace/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "fractrace/errors.hpp"

namespace fractrace {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    std::ostringstream msg;
    msg << "not a number: '" << s << "'";
    throw InvalidParam(msg.str());
  }
  return x;
}

Vector parse_vector(std::string_view s) {
  const auto parts = split(trim(s), ',');
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_double(parts[i]);
  return v;
}

RealMatrix parse_matrix(std::string_view s) {
  const auto rows = split(trim(s), ';');
  const auto n = static_cast<Eigen::Index>(rows.size());
  RealMatrix M(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector r = parse_vector(rows[static_cast<std::size_t>(i)]);
    if (r.size() != n) {
      std::ostringstream msg;
      msg << "matrix row " << i + 1 << " has " << r.size() << " entries, expected " << n;
      throw InvalidParam(msg.str());
    }
    M.row(i) = r.transpose();
  }
  check_square(M);
  return M;
}

std::pair<double, double> parse_range(std::string_view s) {
  s = trim(s);
  // The separator is the first ':' not at position 0.
  const std::size_t pos = s.find(':', 1);
  if (pos == std::string_view::npos) throw InvalidParam("range must look like lo:hi");
  const double lo = parse_double(s.substr(0, pos));
  const double hi = parse_double(s.substr(pos + 1));
  if (!(lo < hi)) throw InvalidParam("range needs lo < hi");
  return {lo, hi};
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::sep() {
  if (filled_ > 0) os_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::cell(double x) {
  sep();
  os_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
  sep();
  os_ << x;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view s) {
  sep();
  os_ << s;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw InvalidParam("CSV row does not match the header width");
  os_ << '\n';
  filled_ = 0;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  for (auto part : split(line, ',')) out.emplace_back(part);
  return out;
}

void SvgPlot::add_marker(double x, double y, std::string color) {
  markers_.push_back({{x, y}, std::move(color)});
}

void SvgPlot::write(std::ostream& os) const {
  constexpr double W = 800, H = 600, L = 70, R = 20, T = 40, B = 50;
  double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
  auto grow = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
  };
  for (const auto& l : lines_)
    for (auto [x, y] : l.points) grow(x, y);
  for (const auto& m : markers_) grow(m.first.first, m.first.second);
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
  x0 -= mx, x1 += mx, y0 -= my, y1 += my;

  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto num = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  os << "<rect width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
  if (!title_.empty())
    os << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << title_ << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
     << H - T - B << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    os << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(std::round(xv * 1e3) / 1e3)
       << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(std::round(yv * 1e3) / 1e3)
       << "</text>\n";
  }
  for (const auto& l : lines_) {
    os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << num(l.width)
       << "\" points=\"";
    bool first = true;
    for (auto [x, y] : l.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!first) os << ' ';
      os << num(px(x)) << ',' << num(py(y));
      first = false;
    }
    os << "\"/>\n";
  }
  for (const auto& m : markers_)
    os << "<circle cx=\"" << num(px(m.first.first)) << "\" cy=\"" << num(py(m.first.second))
       << "\" r=\"4\" fill=\"" << m.second << "\"/>\n";
  os << "</svg>\n";
}

}  // namespace fractrace
