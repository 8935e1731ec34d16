// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fractrace/dynamics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fractrace;
using testing_support::Rng;
using testing_support::vec;

namespace {

/// Accumulates the failures of one criterion.
struct Check {
  std::ostringstream failures;
  int failed = 0;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failed++ < 5) failures << "; " << what;
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

// Systems whose trajectories the criteria exercise; criterion 7 checks them all.
std::vector<std::pair<FractionalSystem, Vector>> g_trajectories;

void record(const FractionalSystem& sys, const Vector& x0) { g_trajectories.emplace_back(sys, x0); }

FractionalSystem rotation_system(double alpha) { return {alpha, testing_support::rotation()}; }

// ---------------------------------------------------------------------------

std::string zeros_of_the_worked_example(Check& c) {
  const auto zeros = find_zeros({1.0 / 3.0, 0.0}, {1.0, 3.0, -2.0, 2.0});
  double worst_res = 0.0;
  for (const Complex target : {testing_support::kLambda1Seed, testing_support::kLambda2Seed}) {
    const auto it = std::find_if(zeros.begin(), zeros.end(), [&](const MLZero& z) {
      return std::abs(z.location.real() - target.real()) <= 1e-3 && std::abs(z.location.imag() - target.imag()) <= 1e-3;
    });
    c.expect(it != zeros.end(), "no zero near " + fmt(target.real()) + fmt(target.imag()) + "i");
    if (it == zeros.end()) continue;
    c.expect(it->residual <= 1e-8, "residual " + fmt(it->residual));
    worst_res = std::max(worst_res, it->residual);
  }
  return std::to_string(zeros.size()) + " zeros, worst residual " + fmt(worst_res);
}

std::string node_and_cusp(Check& c) {
  const Vector x0 = vec({1, 0});
  std::ostringstream info;

  const FractionalSystem s1 = testing_support::lambda1_system();
  record(s1, x0);
  bool node = false;
  for (const MultiplePoint& m : multiple_points(s1, x0, 4.0)) {
    const DoublePoint& d = m.detail;
    if (m.kind == PointKind::node && d.t1 >= 0.5 && d.t2 <= 2.0 && d.t1 < d.t2 && d.crossing_gap < 1e-4) {
      node = true;
      info << "node t1=" << fmt(d.t1) << " t2=" << fmt(d.t2) << " gap=" << fmt(d.crossing_gap);
    }
  }
  c.expect(node, "no node for the lambda1 system");

  const FractionalSystem s2 = testing_support::lambda2_system();
  record(s2, x0);
  bool cusp = false;
  for (const MultiplePoint& m : multiple_points(s2, x0, 4.0)) {
    if (m.kind == PointKind::cusp && std::abs(m.T - 1.0) <= 1e-3 && m.velocity_norm < 1e-5) {
      cusp = true;
      info << ", cusp T=" << fmt(m.T) << " |v|=" << fmt(m.velocity_norm);
    }
  }
  c.expect(cusp, "no cusp for the lambda2 system");
  return info.str();
}

std::string type_ii_collapse(Check& c) {
  Rng rng(1001);
  double worst2 = 0.0, worst3 = 0.0, worst_base = 0.0;
  for (double alpha : {0.5, 0.8}) {
    const FractionalSystem s2 = testing_support::collapse2(alpha);
    const double op = max_norm(ml_matrix(s2.params(), 1.0, s2.A).matrix);
    c.expect(op < 1e-6, "operator max norm " + fmt(op));
    for (int i = 0; i < 50; ++i) {
      const Vector x0 = rng.vector(2, 3.0);
      const double ratio = state(s2, x0, 1.0).norm() / x0.norm();
      worst2 = std::max(worst2, ratio);
      c.expect(ratio <= 1e-5, "2x2 ||u(T)||/||x0|| = " + fmt(ratio));
    }
    record(s2, vec({1, 1}));

    const FractionalSystem s3 = testing_support::collapse3(alpha);
    for (int i = 0; i < 50; ++i) {
      const Vector u = state(s3, rng.vector(3, 3.0), 1.0);
      const double off_axis = std::hypot(u(0), u(1));
      worst3 = std::max(worst3, off_axis);
      c.expect(off_axis <= 1e-6, "3x3 distance to z-axis " + fmt(off_axis));
    }
    record(s3, vec({1, -1, 2}));

    for (double cz : {1.0, -0.4, 2.5}) {
      const auto pre = eist_preimage(s3, vec({0, 0, cz}), 1.0);
      const auto* fiber = std::get_if<AffineSet>(&pre);
      c.expect(fiber != nullptr, "preimage is not a fiber");
      if (!fiber) continue;
      c.expect(fiber->directions.dim() == 2, "fiber dimension " + std::to_string(fiber->directions.dim()));
      const double z1 = cz / ml(alpha, 1.0, -1.0).real();
      const double gap = std::max({std::abs(fiber->base(2) - z1), std::abs(fiber->base(0)), std::abs(fiber->base(1))});
      worst_base = std::max(worst_base, gap);
      c.expect(gap <= 1e-7, "base off by " + fmt(gap));
    }
  }
  return "worst 2x2 ratio " + fmt(worst2) + ", worst axis gap " + fmt(worst3) + ", worst base gap " + fmt(worst_base);
}

std::string generalized_separation(Check& c) {
  Rng rng(1003);
  double worst = 0.0;
  int singular = 0;
  for (double alpha : {0.5, 0.9}) {
    const FractionalSystem sys = rotation_system(alpha);
    for (int i = 0; i < 100; ++i) {
      const Vector p = rng.vector(2, 3.0);
      const double T = rng.uniform(0.1, 5.0);
      const auto pre = eist_preimage(sys, p, T);
      const auto* x = std::get_if<Vector>(&pre);
      c.expect(x != nullptr, "preimage not unique at T=" + fmt(T));
      if (!x) continue;
      const double res = (state(sys, *x, T) - p).norm();
      worst = std::max(worst, res);
      c.expect(res <= 1e-7, "forward residual " + fmt(res));
    }
    for (const auto& r : invertibility_scan(sys.params(), sys.A, linspace(0.0, 5.0, 1001))) {
      const RealMatrix M = ml_matrix(sys.params(), r.t, sys.A).matrix;
      if (!(r.invertible && std::abs(r.det_value) > tol_singular(M))) ++singular;
    }
    record(sys, vec({2, 1}));
  }
  c.expect(singular == 0, std::to_string(singular) + " grid points with |det| <= tol");
  return "worst forward residual " + fmt(worst) + ", singular grid points " + std::to_string(singular);
}

double round_trip_gap(const FractionalSystem& sys, const Vector& x0, const Trajectory& gamma) {
  double worst = 0.0;
  for (const TimedState& s : gamma.samples)
    worst = std::max(worst, (state(sys, s.x, s.t) - x0).norm() / x0.norm());
  return worst;
}

std::string inverse_curve_identities(Check& c) {
  double worst_rt = 0.0, worst_ev = 0.0;
  auto check = [&](const FractionalSystem& sys, const Vector& x0, const std::vector<double>& grid,
                   std::initializer_list<double> T_tildes) {
    const double rt = round_trip_gap(sys, x0, inverse_curve(sys, x0, grid));
    worst_rt = std::max(worst_rt, rt);
    c.expect(rt <= 1e-7, "round trip " + fmt(rt));
    for (double Tt : T_tildes) {
      const double ev = evolve_inverse_curve(sys, x0, Tt, grid).max_rel_gap;
      worst_ev = std::max(worst_ev, ev);
      c.expect(ev <= 1e-7, "evolution identity " + fmt(ev) + " at T~=" + fmt(Tt));
    }
  };
  check(rotation_system(0.9), vec({2, 1}), linspace(0.0, 2.0, 200), {0.5, 1.2});

  Rng rng(1005);
  const double alphas[] = {0.5, 0.65, 0.8, 0.95};
  int systems = 0;
  while (systems < 10) {
    const FractionalSystem sys{alphas[systems % 4], rng.matrix(3, 1.0)};
    if (classify(sys).verdict != Verdict::TypeI) continue;
    const Vector x0 = rng.vector(3, 2.0);
    check(sys, x0, linspace(0.0, 2.0, 200), {0.5, 1.2});
    record(sys, x0);
    ++systems;
  }
  return "rotation + 10 random Type I 3x3: worst round trip " + fmt(worst_rt) + ", worst evolution " + fmt(worst_ev);
}

std::string property_suite(Check& c) {
  static const double alphas[] = {0.3, 0.45, 0.5, 0.65, 0.8, 0.95, 1.0};
  static const double betas[] = {0.0, 0.5, 1.0, 1.7};
  Rng rng(1007);
  auto params = [&]() -> MLParams {
    return {alphas[static_cast<int>(rng.uniform(0, 7))], betas[static_cast<int>(rng.uniform(0, 4))]};
  };
  auto point = [&](double alpha, double floor) {
    return std::polar(rng.uniform(floor, std::min(10.0, 0.8 * domain_radius(alpha))), rng.uniform(-M_PI, M_PI));
  };
  const int n = 60;

  // E_{a,b}(z) = 1/Gamma(b) + z E_{a,a+b}(z), within the reported error budgets.
  for (int i = 0; i < n; ++i) {
    const MLParams p = params();
    const Complex z = point(p.alpha, 0.0);
    const EvalResult lhs = ml_eval(p, z), shifted = ml_eval({p.alpha, p.alpha + p.beta}, z);
    const double budget =
        10.0 * (lhs.est_rel_error * std::abs(lhs.value) + shifted.est_rel_error * std::abs(z * shifted.value));
    c.expect(std::abs(lhs.value - (recip_gamma(p.beta) + z * shifted.value)) <= budget, "recurrence");
  }
  for (int i = 0; i < n; ++i) {
    const MLParams p = params();
    const Complex z = point(p.alpha, 0.0);
    const Complex a = ml_eval(p, std::conj(z)).value, b = std::conj(ml_eval(p, z).value);
    c.expect(std::abs(a - b) <= 4e-16 * std::abs(b), "conjugate symmetry");
  }
  for (int i = 0; i < n; ++i) {
    const Complex z = std::polar(rng.uniform(0.0, 10.0), rng.uniform(-M_PI, M_PI));
    c.expect(std::abs(ml(1.0, z) - std::exp(z)) <= 1e-12 * std::abs(std::exp(z)), "alpha=1 exponential");
  }
  const double h = 1e-6;
  for (int i = 0; i < n; ++i) {
    const MLParams p = params();
    const Complex z = point(p.alpha, 0.1);
    const Complex d = ml_deriv(p, z).value;
    const Complex fd = (ml_eval(p, z + h).value - ml_eval(p, z - h).value) / (2.0 * h);
    // Central differences lose about |E| eps / h absolute.
    const double floor = 1e-15 * std::abs(ml_eval(p, z).value) / h;
    c.expect(std::abs(d - fd) <= 1e-6 * std::abs(d) + 10.0 * floor, "derivative vs finite difference");
  }
  int mapped = 0;
  while (mapped < n) {
    const RealMatrix A = rng.matrix(4, 1.0);
    const EigenDecomp e = eigen(A);
    if (!e.diagonalizable || e.cond_v > 1e3) continue;
    const double alpha = alphas[mapped % 6], t = rng.uniform(0.2, 1.5);
    const EigenvalueMap m = eigenvalue_map_check({alpha, 1.0}, t, A);
    for (const Complex lambda : oracle::charpoly_roots(A)) {
      const Complex expected = ml(alpha, 1.0, std::pow(t, alpha) * lambda);
      double best = HUGE_VAL;
      for (const auto& pair : m.pairs) best = std::min(best, std::abs(pair.observed - expected));
      c.expect(best <= 1e-8 * std::max(1.0, std::abs(expected)), "eigenvalue map");
    }
    ++mapped;
  }
  for (int i = 0; i < n; ++i) {
    const double alpha = alphas[i % 6];
    const RealMatrix A = rng.matrix(3, 1.5);
    const RealMatrix P = ml_matrix({alpha, 1.0}, 0.3, A).matrix, Q = ml_matrix({alpha, 1.0}, 1.7, A).matrix;
    c.expect(max_norm(RealMatrix(P * Q - Q * P)) <= 1e-10 * std::max(1.0, max_norm(P) * max_norm(Q)),
             "commutativity");
  }
  return "6 batches x " + std::to_string(n) + " cases";
}

std::string ivp_residuals(Check& c) {
  double worst = 0.0;
  for (const auto& [sys, x0] : g_trajectories) {
    const double rel = ivp_residual(sys, x0, 1e-3, 0.5, 2.0).relative;
    worst = std::max(worst, rel);
    c.expect(rel <= 5e-3, "relative residual " + fmt(rel) + " at alpha=" + fmt(sys.alpha));
  }
  return std::to_string(g_trajectories.size()) + " trajectories, worst " + fmt(worst);
}

std::string exponential_oracle(Check& c) {
  Rng rng(1009);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const RealMatrix A = rng.matrix_with_norm(3, rng.uniform(0.1, 2.0));
    const double gap = max_norm(RealMatrix(ml_matrix({1.0, 1.0}, 1.0, A).matrix - oracle::expm(A)));
    worst = std::max(worst, gap);
    c.expect(gap <= 1e-9, "max-norm gap " + fmt(gap));
  }
  return "worst max-norm gap " + fmt(worst);
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<std::string(Check&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "zeros of E_{1/3,0}", 30.0, zeros_of_the_worked_example},
      {2, "node and cusp", 60.0, node_and_cusp},
      {3, "Type II collapse", 0.0, type_ii_collapse},
      {4, "generalized separation", 0.0, generalized_separation},
      {5, "inverse-curve identities", 0.0, inverse_curve_identities},
      {6, "function-level properties", 120.0, property_suite},
      {7, "IVP residual", 0.0, ivp_residuals},
      {8, "matrix exponential oracle", 0.0, exponential_oracle},
  };
  int failures = 0;
  for (const Criterion& cr : criteria) {
    Check c;
    std::string info;
    const auto start = std::chrono::steady_clock::now();
    try {
      info = cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.budget_s > 0) c.expect(secs < cr.budget_s, "runtime " + fmt(secs) + " s over " + fmt(cr.budget_s) + " s");
    const bool pass = c.failed == 0;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]%s\n", pass ? "PASS" : "FAIL", cr.id, cr.name, info.c_str(), secs,
                c.failures.str().c_str());
  }
  return failures == 0 ? 0 : 1;
}
