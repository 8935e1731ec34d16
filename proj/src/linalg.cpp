#include "fractrace/linalg.hpp"

#include <limits>
#include <sstream>

#include "fractrace/errors.hpp"

namespace fractrace {

namespace {

template <typename Matrix>
void check_square_impl(const Matrix& M) {
  if (M.rows() != M.cols() || M.rows() < 1 || M.rows() > kMaxDim) {
    std::ostringstream msg;
    msg << "expected a square matrix of size 1.." << kMaxDim << ", got " << M.rows() << "x"
        << M.cols();
    throw InvalidParam(msg.str());
  }
  if (!M.allFinite()) throw InvalidParam("matrix entries must be finite");
}

template <typename Matrix>
double tol_singular_impl(const Matrix& M) {
  return 1e-10 * max_norm(M) * static_cast<double>(M.rows());
}

EigenDecomp finish(const Eigen::VectorXcd& values, ComplexMatrix vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    const double n = vectors.col(j).norm();
    if (n > 0.0) vectors.col(j) /= n;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(vectors);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  EigenDecomp out;
  out.values = values;
  out.vectors = std::move(vectors);
  out.cond_v = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  out.diagonalizable = out.cond_v <= kDefectiveCond;
  return out;
}

template <typename Matrix>
auto inverse_impl(const Matrix& M) {
  check_square(M);
  Eigen::PartialPivLU<Matrix> lu(M);
  if (!(std::abs(lu.determinant()) > tol_singular(M))) {
    std::ostringstream msg;
    msg << "matrix is singular: |det| = " << std::abs(lu.determinant())
        << " <= " << tol_singular(M);
    throw SingularError(msg.str());
  }
  return Matrix(lu.inverse());
}

// reference < 0 selects the largest singular value.
Eigen::Index rank_from(const Eigen::VectorXd& s, double tol, double reference = -1.0) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = tol * (reference < 0.0 ? s(0) : reference);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

template <typename Scalar>
std::pair<SubspaceBasis<Scalar>, SubspaceBasis<Scalar>> split_spaces(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M, double tol,
    double reference = -1.0) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  check_square(M);
  if (!(tol >= 0.0)) throw InvalidParam("rank tolerance must be non-negative");
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index n = M.rows();
  const auto& s = svd.singularValues();
  const Eigen::Index r = rank_from(s, tol, reference);
  // Report the cut relative to ||M||_2 so the kernel bound reads the same
  // whichever reference was used.
  const double used = reference < 0.0 || s(0) == 0.0 ? tol : tol * reference / s(0);
  SubspaceBasis<Scalar> kernel{svd.matrixV().rightCols(n - r), used};
  SubspaceBasis<Scalar> image{svd.matrixU().leftCols(r), used};
  return {kernel, image};
}

}  // namespace

void check_square(const RealMatrix& M) { check_square_impl(M); }
void check_square(const ComplexMatrix& M) { check_square_impl(M); }

double max_norm(const RealMatrix& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }
double max_norm(const ComplexMatrix& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

double tol_singular(const RealMatrix& M) { return tol_singular_impl(M); }
double tol_singular(const ComplexMatrix& M) { return tol_singular_impl(M); }

EigenDecomp eigen(const RealMatrix& A) {
  check_square(A);
  Eigen::EigenSolver<RealMatrix> es(A, true);
  if (es.info() != Eigen::Success) throw NonConvergence("real eigensolver did not converge");
  return finish(es.eigenvalues(), es.eigenvectors());
}

EigenDecomp eigen(const ComplexMatrix& A) {
  check_square(A);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(A, true);
  if (es.info() != Eigen::Success) throw NonConvergence("complex eigensolver did not converge");
  return finish(es.eigenvalues(), es.eigenvectors());
}

double det(const RealMatrix& M) {
  check_square(M);
  return M.partialPivLu().determinant();
}

Complex det(const ComplexMatrix& M) {
  check_square(M);
  return M.partialPivLu().determinant();
}

RealMatrix inverse(const RealMatrix& M) { return inverse_impl(M); }
ComplexMatrix inverse(const ComplexMatrix& M) { return inverse_impl(M); }

double sigma_min(const RealMatrix& M) {
  check_square(M);
  const auto s = Eigen::JacobiSVD<RealMatrix>(M).singularValues();
  return s(s.size() - 1);
}

double sigma_max(const RealMatrix& M) {
  check_square(M);
  return Eigen::JacobiSVD<RealMatrix>(M).singularValues()(0);
}

Eigen::Index rank(const RealMatrix& M, double tol) {
  check_square(M);
  return rank_from(Eigen::JacobiSVD<RealMatrix>(M).singularValues(), tol);
}

RealBasis kernel_basis(const RealMatrix& M, double tol) { return split_spaces<double>(M, tol).first; }
RealBasis image_basis(const RealMatrix& M, double tol) { return split_spaces<double>(M, tol).second; }
ComplexBasis kernel_basis(const ComplexMatrix& M, double tol) {
  return split_spaces<Complex>(M, tol).first;
}
ComplexBasis image_basis(const ComplexMatrix& M, double tol) {
  return split_spaces<Complex>(M, tol).second;
}

RealBasis kernel_basis(const RealMatrix& M, double tol, double reference) {
  return split_spaces<double>(M, tol, reference).first;
}
RealBasis image_basis(const RealMatrix& M, double tol, double reference) {
  return split_spaces<double>(M, tol, reference).second;
}

Vector truncated_solve(const RealMatrix& M, const Vector& b, double tol, double reference) {
  check_square(M);
  if (b.size() != M.rows()) throw InvalidParam("right-hand side has the wrong length");
  Eigen::JacobiSVD<RealMatrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Eigen::Index r = rank_from(s, tol, reference);
  Vector x = Vector::Zero(M.cols());
  for (Eigen::Index i = 0; i < r; ++i)
    x += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / s(i));
  return x;
}

double distance_to_span(const RealBasis& basis, const Vector& v) {
  if (basis.dim() == 0) return v.norm();
  const Vector proj = basis.vectors * (basis.vectors.transpose() * v);
  return (v - proj).norm();
}

}  // namespace fractrace
