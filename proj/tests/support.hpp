#pragma once

#include <random>

#include "fractrace/dynamics.hpp"

namespace testing_support {

using fractrace::Complex;
using fractrace::FractionalSystem;
using fractrace::RealMatrix;
using fractrace::Vector;

inline RealMatrix rotation() {
  RealMatrix A(2, 2);
  A << 0, 1, -1, 0;
  return A;
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline double rel_gap(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

/// Zeros of E_{1/3,0} refined from the six-digit seeds of the worked example.
inline constexpr Complex kLambda1Seed{2.21095, -1.60243};
inline constexpr Complex kLambda2Seed{1.47895, 1.349246};

inline FractionalSystem lambda1_system() { return fractrace::system_from_zero(1.0 / 3.0, kLambda1Seed); }
inline FractionalSystem lambda2_system() { return fractrace::system_from_zero(1.0 / 3.0, kLambda2Seed); }

/// First zero of E_{alpha,1} in the upper half plane.
inline Complex first_zero(double alpha) {
  return fractrace::find_zeros({alpha, 1.0}, {0.0, 6.0, 0.0, 8.0}, 1).at(0).location;
}

/// 2x2 system whose operator vanishes at T = 1: eigenvalues zeta, conj(zeta).
inline FractionalSystem collapse2(double alpha) {
  const Complex z = first_zero(alpha);
  FractionalSystem sys{alpha, RealMatrix(2, 2)};
  sys.A << z.real(), z.imag(), -z.imag(), z.real();
  return sys;
}

/// 3x3 system: the 2x2 collapse block in (x, y) plus -1 on the z axis.
inline FractionalSystem collapse3(double alpha) {
  const FractionalSystem s2 = collapse2(alpha);
  FractionalSystem sys{alpha, RealMatrix::Zero(3, 3)};
  sys.A.topLeftCorner(2, 2) = s2.A;
  sys.A(2, 2) = -1.0;
  return sys;
}

class Rng {
 public:
  explicit Rng(unsigned seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }

  Vector vector(Eigen::Index n, double scale = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(-scale, scale);
    return v;
  }

  RealMatrix matrix(Eigen::Index n, double scale = 1.0) {
    RealMatrix M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) M(i, j) = uniform(-scale, scale);
    return M;
  }

  /// Random matrix rescaled to the given infinity norm.
  RealMatrix matrix_with_norm(Eigen::Index n, double norm) {
    RealMatrix M = matrix(n);
    return M * (norm / M.cwiseAbs().rowwise().sum().maxCoeff());
  }

  /// Negative-definite symmetric matrix with eigenvalues in [-3, -0.2]: every
  /// eigenvalue has argument pi, which no zero of E_{alpha,1} shares.
  RealMatrix stable_symmetric(Eigen::Index n) {
    const Eigen::HouseholderQR<RealMatrix> qr(matrix(n));
    const RealMatrix Q = qr.householderQ();
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = -uniform(0.2, 3.0);
    return Q * d.asDiagonal() * Q.transpose();
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace testing_support
