#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fractrace/cli.hpp"
#include "fractrace/io.hpp"

namespace fractrace {

namespace {

constexpr const char* kCurve = "#c0392b";
constexpr const char* kGrey = "#9a9a9a";
constexpr const char* kBlue = "#2166ac";
constexpr const char* kGreen = "#1b7f3a";

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) g[static_cast<std::size_t>(j)] = j + 1 == n ? b : a + (b - a) * j / (n - 1);
  return g;
}

Polyline plane_curve(const Trajectory& tr, const char* color, double width = 1.5) {
  Polyline l;
  l.color = color;
  l.width = width;
  for (const auto& s : tr.samples) l.points.emplace_back(s.x(0), s.x(1));
  return l;
}

struct Output {
  std::filesystem::path dir;
  std::ostringstream summary;

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot open " + (dir / name).string() + " for writing");
    return f;
  }

  void svg(const std::string& name, const SvgPlot& plot) {
    auto f = open(name);
    plot.write(f);
  }
};

void curve_rows(CsvWriter& w, const std::string& name, const Trajectory& tr) {
  for (const auto& s : tr.samples) {
    w.cell(name).cell(s.t).cell(s.x(0)).cell(s.x(1));
    w.end_row();
  }
}

void figure1(Output& o, const FractionalSystem& sys, const Vector& x0) {
  const Trajectory gamma = inverse_curve(sys, x0, linspace(0.0, 2.0, 200));
  SvgPlot plot("inverse curve gamma_x0 (red) and trajectories from its points (grey)");
  auto f = o.open("fig1.csv");
  CsvWriter w(f, {"curve", "t", "x1", "x2"});
  curve_rows(w, "gamma", gamma);
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double tk = 0.25 * k;
    const Vector start = inverse_curve(sys, x0, {tk}).samples.front().x;
    const Trajectory tr = solve_trajectory(sys, start, linspace(0.0, tk, 100));
    worst = std::max(worst, (tr.samples.back().x - x0).norm() / x0.norm());
    curve_rows(w, "trajectory_" + format_double(tk), tr);
    plot.add(plane_curve(tr, kGrey, 1.0));
  }
  plot.add(plane_curve(gamma, kCurve, 2.0));
  plot.add_marker(x0(0), x0(1), "#000000");
  o.svg("fig1.svg", plot);
  o.summary << "fig1.csv round_trip_rel " << format_double(worst) << " ivp_rel "
            << format_double(ivp_residual(sys, gamma.samples.back().x, 1e-3, 0.5, 2.0).relative) << "\n";
}

void figure2(Output& o, const FractionalSystem& sys, const Vector& x0) {
  const auto grid = linspace(0.0, 2.0, 200);
  SvgPlot plot("gamma_x0 (red) and its evolution at T = 0.5 (blue), 1.2 (green)");
  auto f = o.open("fig2.csv");
  CsvWriter w(f, {"curve", "t", "x1", "x2"});
  const Trajectory gamma = inverse_curve(sys, x0, grid);
  curve_rows(w, "gamma", gamma);
  plot.add(plane_curve(gamma, kCurve, 2.0));
  plot.add(plane_curve(solve_trajectory(sys, x0, linspace(0.0, 1.2, 120)), "#000000", 1.0));
  double gap = 0.0;
  for (double Tt : {0.5, 1.2}) {
    const EvolvedCurve ev = evolve_inverse_curve(sys, x0, Tt, grid);
    gap = std::max(gap, ev.max_rel_gap);
    curve_rows(w, "gamma_q_" + format_double(Tt), ev.direct);
    curve_rows(w, "evolved_" + format_double(Tt), ev.evolved);
    plot.add(plane_curve(ev.direct, Tt < 1.0 ? kBlue : kGreen));
  }
  o.svg("fig2.svg", plot);
  o.summary << "fig2.csv evolution_rel " << format_double(gap) << " ivp_rel "
            << format_double(ivp_residual(sys, x0, 1e-3, 0.5, 2.0).relative) << "\n";
}

void figure3(Output& o, const std::string& name, const FractionalSystem& sys, const Vector& x0) {
  auto grid = linspace(0.5, 2.0, 600);
  const DoublePoint dp = classify_double_point(sys, x0, 1.0);
  grid.push_back(1.0);
  if (dp.kind == PointKind::node) {
    grid.push_back(dp.t1);
    grid.push_back(dp.t2);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const Trajectory tr = solve_trajectory(sys, x0, grid);
  auto f = o.open(name + ".csv");
  CsvWriter w(f, {"t", "x1", "x2", "velocity_norm"});
  for (const auto& s : tr.samples) {
    w.cell(s.t).cell(s.x(0)).cell(s.x(1)).cell(velocity(sys, x0, s.t).norm());
    w.end_row();
  }
  SvgPlot plot(std::string("trajectory on [1/2, 2]: ") + to_string(dp.kind) + " at T = 1");
  plot.add(plane_curve(tr, kBlue, 2.0));
  const Vector p = state(sys, x0, 1.0);
  plot.add_marker(p(0), p(1), kCurve);
  o.svg(name + ".svg", plot);
  o.summary << name << ".csv kind " << to_string(dp.kind) << " velocity_norm "
            << format_double(dp.velocity_norm) << " ivp_rel "
            << format_double(ivp_residual(sys, x0, 1e-3, 0.5, 2.0).relative) << "\n";
}

}  // namespace

std::string reproduce_figures(const std::string& outdir) {
  Output o;
  o.dir = outdir;
  std::error_code ec;
  std::filesystem::create_directories(o.dir, ec);
  if (ec) throw Error("cannot create " + outdir + ": " + ec.message());

  FractionalSystem rot{0.9, RealMatrix(2, 2)};
  rot.A << 0, 1, -1, 0;
  Vector x0(2);
  x0 << 2, 1;
  figure1(o, rot, x0);
  figure2(o, rot, x0);

  Vector e1(2);
  e1 << 1, 0;
  figure3(o, "fig3a", system_from_zero(1.0 / 3.0, {2.21095, -1.60243}), e1);
  figure3(o, "fig3b", system_from_zero(1.0 / 3.0, {1.47895, 1.349246}), e1);
  return o.summary.str();
}

}  // namespace fractrace
