#pragma once

#include <Eigen/Dense>

#include "fractrace/scalar_ml.hpp"

namespace fractrace {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Largest supported dimension.
inline constexpr Eigen::Index kMaxDim = 8;

/// Eigenvectors whose matrix is worse conditioned than this mark A as defective.
inline constexpr double kDefectiveCond = 1e8;

struct EigenDecomp {
  ComplexVector values;
  ComplexMatrix vectors;  // unit columns
  double cond_v = 1.0;    // 2-norm condition number of `vectors`
  bool diagonalizable = true;
};

/// Orthonormal basis stored as matrix columns (possibly zero columns).
template <typename Scalar>
struct SubspaceBasis {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
  double tol_used = 0.0;

  Eigen::Index dim() const { return vectors.cols(); }
};

using RealBasis = SubspaceBasis<double>;
using ComplexBasis = SubspaceBasis<Complex>;

/// Throws InvalidParam unless M is square, 1 <= n <= kMaxDim, all entries finite.
void check_square(const RealMatrix& M);
void check_square(const ComplexMatrix& M);

double max_norm(const RealMatrix& M);
double max_norm(const ComplexMatrix& M);

/// Scale-aware singularity threshold 1e-10 * ||M||_max * n.
double tol_singular(const RealMatrix& M);
double tol_singular(const ComplexMatrix& M);

/// Eigenvalues and unit eigenvectors. Throws NonConvergence if the QR
/// iteration fails.
EigenDecomp eigen(const RealMatrix& A);
EigenDecomp eigen(const ComplexMatrix& A);

double det(const RealMatrix& M);
Complex det(const ComplexMatrix& M);

/// Throws SingularError when |det M| <= tol_singular(M).
RealMatrix inverse(const RealMatrix& M);
ComplexMatrix inverse(const ComplexMatrix& M);

/// Smallest and largest singular values.
double sigma_min(const RealMatrix& M);
double sigma_max(const RealMatrix& M);

/// Numerical rank: singular values above tol * sigma_max.
Eigen::Index rank(const RealMatrix& M, double tol);

/// Null space and column space from the SVD. A singular value counts as zero
/// when it is <= tol * sigma_max (all of them for the zero matrix), so each
/// kernel vector v satisfies ||M v|| <= tol * ||M||_2.
RealBasis kernel_basis(const RealMatrix& M, double tol);
RealBasis image_basis(const RealMatrix& M, double tol);
ComplexBasis kernel_basis(const ComplexMatrix& M, double tol);
ComplexBasis image_basis(const ComplexMatrix& M, double tol);

/// Variants with an explicit reference scale: a singular value counts as zero
/// when it is <= tol * reference. Used where the whole matrix may collapse
/// towards zero and a purely relative cut would see full rank.
RealBasis kernel_basis(const RealMatrix& M, double tol, double reference);
RealBasis image_basis(const RealMatrix& M, double tol, double reference);

/// Minimum-norm least-squares solution of M x = b using only the singular
/// values above tol * reference.
Vector truncated_solve(const RealMatrix& M, const Vector& b, double tol, double reference);

/// Distance from v to the span of an orthonormal basis.
double distance_to_span(const RealBasis& basis, const Vector& v);

}  // namespace fractrace
