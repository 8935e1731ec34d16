#pragma once

#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "fractrace/caputo.hpp"
#include "fractrace/errors.hpp"
#include "fractrace/linalg.hpp"
#include "fractrace/ml_operator.hpp"
#include "fractrace/zeros.hpp"

namespace fractrace {

/// D^alpha x = A x with a Caputo derivative of order 0 < alpha < 1.
struct FractionalSystem {
  double alpha = 0.5;
  RealMatrix A;

  /// Throws InvalidParam unless 0 < alpha < 1 and A is a valid square matrix.
  void validate() const;
  MLParams params(double beta = 1.0) const { return {alpha, beta}; }
};

/// Tolerances of the intersection analysis. FRACTRACE_TOL_SCALE multiplies
/// all of them in the CLI.
/// 2x2 system [[Re z, Im z], [-Im z, Re z]] (eigenvalues z, conj z) with z the
/// zero of E_{alpha,beta} Newton-refined from `seed`.
FractionalSystem system_from_zero(double alpha, Complex seed, double beta = 0.0);

struct Tolerances {
  double angular = 1e-6;       // eigenvalue / zero argument match (rad)
  double asymptotic_band = 0.05;  // disclosure band around +-alpha pi / 2 (rad)
  double collapse = 1e-6;      // singular values below this (x max(1, ||M||)) are zero
  double membership = 1e-6;    // kernel / image projection residual, relative
  double round_trip = 1e-7;    // forward residual of preimages and inverse curves
  double witness = 1e-6;       // EIDT meeting residual, relative to 1 + ||point||
  double stationary = 1e-5;    // velocity norm at a multiple point, relative to 1 + ||p||
  double origin = 1e-5;        // ||u(T; x0)|| / ||x0|| at a zero intersection

  Tolerances scaled(double factor) const;
};

/// Default zero-table modulus for classification.
inline constexpr double kDefaultSearchBound = 20.0;

struct Trajectory {
  FractionalSystem system;
  Eigen::VectorXd x0;
  std::vector<TimedState> samples;
};

/// u(t; x0) = E_alpha(t^alpha A) x0.
Eigen::VectorXd state(const FractionalSystem& sys, const Eigen::VectorXd& x0, double t);

/// u(t_j; x0) on a strictly increasing grid of t_j >= 0.
Trajectory solve_trajectory(const FractionalSystem& sys, const Eigen::VectorXd& x0,
                            const std::vector<double>& t_grid);

/// Uniform grid 0, h, ..., t_max (t_max / h rounded to the nearest integer).
std::vector<double> uniform_grid(double t_max, double h);

struct IVPResidual {
  double max_abs = 0.0;   // max ||D^alpha x - A x|| over the window
  double scale = 0.0;     // max ||A x|| over the window
  double relative = 0.0;  // max_abs / scale (0 when both vanish)
};

/// Checks a trajectory against the IVP with the L1 Caputo scheme: solves on
/// 0..t_hi with step h and compares D^alpha x with A x on [t_lo, t_hi].
IVPResidual ivp_residual(const FractionalSystem& sys, const Eigen::VectorXd& x0, double h = 1e-3,
                         double t_lo = 0.5, double t_hi = 2.0);

struct CriticalRay {
  Complex eigenvalue;
  MLZero zero;         // zero of E_{alpha,1}
  double T = 0.0;      // (|zero| / |eigenvalue|)^(1/alpha)
  double arg_mismatch = 0.0;
};

enum class Verdict { TypeI, TypeII };

const char* to_string(Verdict v);

struct Classification {
  Verdict verdict = Verdict::TypeI;
  std::vector<CriticalRay> criticals;
  /// Modulus up to which zeros were enumerated (R clamped to the evaluation domain).
  double search_bound = 0.0;
  /// Eigenvalues in the band |arg lambda| within asymptotic_band of
  /// alpha pi / 2 that did not match a zero inside the search bound.
  std::vector<Complex> asymptotic_flags;
};

/// Matches eigenvalue arguments of A against zeros of E_{alpha,1} with
/// modulus <= R. Completeness is relative to R.
Classification classify(const FractionalSystem& sys, double R = kDefaultSearchBound,
                        const Tolerances& tol = {});

/// One ray per argument match, sorted by T.
std::vector<CriticalRay> critical_times(const FractionalSystem& sys,
                                        double R = kDefaultSearchBound,
                                        const Tolerances& tol = {});

struct ZeroIntersection {
  double T = 0.0;
  double kernel_residual = 0.0;  // dist(x0, ker E(T^alpha A)) / ||x0||
  double state_norm = 0.0;       // ||u(T; x0)||
};

/// First critical time at which x0 lies in the kernel of the solution
/// operator and the trajectory verifiably reaches the origin. Empty for x0 = 0.
std::optional<ZeroIntersection> zero_intersection(const FractionalSystem& sys,
                                                  const Eigen::VectorXd& x0,
                                                  double R = kDefaultSearchBound,
                                                  const Tolerances& tol = {});

/// base + span(directions).
struct AffineSet {
  Eigen::VectorXd base;
  RealBasis directions;

  Eigen::VectorXd point(const Eigen::VectorXd& coeffs) const;
};

/// Operator kernel at time T with the collapse threshold applied.
RealBasis operator_kernel(const FractionalSystem& sys, double T, const Tolerances& tol = {});
/// Operator image at time T with the collapse threshold applied.
RealBasis operator_image(const FractionalSystem& sys, double T, const Tolerances& tol = {});

/// gamma_{x0}(t) = E_alpha(t^alpha A)^{-1} x0 on the grid. Throws
/// SingularError when a grid point hits a critical time.
Trajectory inverse_curve(const FractionalSystem& sys, const Eigen::VectorXd& x0,
                         const std::vector<double>& t_grid);

struct EvolvedCurve {
  Trajectory direct;   // gamma_q with q = u(T~; x0)
  Trajectory evolved;  // E_alpha(T~^alpha A) gamma_{x0}
  double max_rel_gap = 0.0;
};

EvolvedCurve evolve_inverse_curve(const FractionalSystem& sys, const Eigen::VectorXd& x0,
                                  double T_tilde, const std::vector<double>& t_grid);

/// Initial condition(s) whose trajectories pass through p at time T: a unique
/// vector when the operator is invertible, otherwise the affine fiber.
/// Throws NotReachable when p is outside the operator image.
std::variant<Eigen::VectorXd, AffineSet> eist_preimage(const FractionalSystem& sys,
                                                       const Eigen::VectorXd& p, double T,
                                                       const Tolerances& tol = {});

/// {y : E_alpha(T^alpha A) y = x}; empty when x is outside the image.
std::optional<AffineSet> h_set(const FractionalSystem& sys, const Eigen::VectorXd& x, double T,
                               const Tolerances& tol = {});

struct EIDTWitness {
  double T = 0.0;  // time on the trajectory of x0
  double t = 0.0;  // time on the trajectory of x
  Eigen::VectorXd meeting_point;
  double residual = 0.0;  // ||u(T; x0) - u(t; x)||
};

/// Searches T in T_grid's range and t in t_grid's range for u(t; x) = u(T; x0)
/// with T != t: coarse scan over the grids, then damped Gauss-Newton on every
/// local minimum. Returns the valid witness with the smallest T, then t.
std::optional<EIDTWitness> eidt_witness(const FractionalSystem& sys, const Eigen::VectorXd& x0,
                                        const Eigen::VectorXd& x,
                                        const std::vector<double>& T_grid,
                                        const std::vector<double>& t_grid,
                                        const Tolerances& tol = {});

struct SPoint {
  Eigen::VectorXd point;
  double T = 0.0;  // trajectory of x0 is at u(T; x0) ...
  double t = 0.0;  // ... which the trajectory of `point` reaches at time t
  double residual = 0.0;
  bool fiber = false;  // from an H fiber rather than an inverse curve
};

/// Grid sample of the set of points whose trajectories meet u(.; x0). Points
/// failing the witness residual are dropped. Critical times are skipped on the
/// inverse-curve part; for Type II systems H-fiber samples with kernel
/// coefficients in [-2, 2] are added.
std::vector<SPoint> sample_S(const FractionalSystem& sys, const Eigen::VectorXd& x0,
                             const std::vector<double>& T_grid, const std::vector<double>& t_grid,
                             double R = kDefaultSearchBound, const Tolerances& tol = {});

/// d/dt u(t; x0) = (1/t) E_{alpha,0}(t^alpha A) x0 for t > 0.
Eigen::VectorXd velocity(const FractionalSystem& sys, const Eigen::VectorXd& x0, double t);

enum class PointKind { node, cusp, unresolved };

const char* to_string(PointKind k);

struct DoublePoint {
  PointKind kind = PointKind::unresolved;
  double velocity_norm = 0.0;  // ||velocity|| at T
  // Best crossing found around T (node evidence).
  double t1 = 0.0;
  double t2 = 0.0;
  double crossing_gap = HUGE_VAL;  // ||u(t1) - u(t2)||
  double crossing_cos = 1.0;       // cosine between the branch velocities at the crossing
  // Direction change of the velocity across T (cusp evidence).
  double reversal_cos = 1.0;
};

/// Node if the trajectory crosses itself transversally near T: t1 < t2 in
/// [T - w, T + w], w = T / 2, t2 - t1 >= 1e-3 w, ||u(t1) - u(t2)|| <= 1e-6 and
/// |cos| between the branch velocities <= 0.99. Cusp if there is no such
/// crossing, the velocity at T is stationary and the direction reverses
/// (cosine < -0.5). Unresolved otherwise.
DoublePoint classify_double_point(const FractionalSystem& sys, const Eigen::VectorXd& x0,
                                  double T, const Tolerances& tol = {});

struct MultiplePoint {
  double T = 0.0;
  Eigen::VectorXd p;
  PointKind kind = PointKind::unresolved;
  double velocity_norm = 0.0;
  MLZero zero;  // zero of E_{alpha,0} that produced T
  DoublePoint detail;
};

/// Points u(T; x0) where the velocity vanishes: T from argument matches of A's
/// eigenvalues with zeros of E_{alpha,0}, kept when x0 lies in the kernel of
/// E_{alpha,0}(T^alpha A). Sorted by T.
std::vector<MultiplePoint> multiple_points(const FractionalSystem& sys, const Eigen::VectorXd& x0,
                                           double R = kDefaultSearchBound,
                                           const Tolerances& tol = {});

}  // namespace fractrace
