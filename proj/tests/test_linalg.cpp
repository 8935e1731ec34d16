#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fractrace/errors.hpp"
#include "fractrace/linalg.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fractrace;
using testing_support::Rng;

namespace {

// Greedy nearest matching of two multisets of complex numbers.
double multiset_gap(std::vector<Complex> a, std::vector<Complex> b) {
  double worst = 0.0;
  for (const Complex x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](Complex u, Complex v) { return std::abs(u - x) < std::abs(v - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

std::vector<Complex> to_list(const ComplexVector& v) { return {v.data(), v.data() + v.size()}; }

double orthonormality_gap(const RealMatrix& Q) {
  if (Q.cols() == 0) return 0.0;
  return max_norm(RealMatrix(Q.transpose() * Q - RealMatrix::Identity(Q.cols(), Q.cols())));
}

}  // namespace

TEST(Eigen, Identity) {
  const EigenDecomp d = eigen(RealMatrix(RealMatrix::Identity(4, 4)));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_LT(std::abs(d.values(i) - 1.0), 1e-15);
  EXPECT_TRUE(d.diagonalizable);
}

TEST(Eigen, RotationGeneratorHasPlusMinusI) {
  const EigenDecomp d = eigen(testing_support::rotation());
  EXPECT_LT(multiset_gap(to_list(d.values), {{0.0, 1.0}, {0.0, -1.0}}), 1e-14);
  EXPECT_TRUE(d.diagonalizable);
}

TEST(Eigen, SymmetricMatchesCharacteristicPolynomialOracle) {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const RealMatrix M = rng.matrix(4);
    const RealMatrix S = M + M.transpose();
    const EigenDecomp d = eigen(S);
    EXPECT_LT(multiset_gap(to_list(d.values), oracle::charpoly_roots(S)), 1e-10);
  }
}

TEST(Eigen, DecompositionInvariant) {
  Rng rng(37);
  for (int i = 0; i < 50; ++i) {
    const auto n = static_cast<Eigen::Index>(rng.uniform(1, 9));
    const RealMatrix A = rng.matrix(n, 3.0);
    const EigenDecomp d = eigen(A);
    if (!d.diagonalizable) continue;
    const ComplexMatrix Ac = A.cast<Complex>();
    const ComplexMatrix lhs = Ac * d.vectors, rhs = d.vectors * d.values.asDiagonal();
    EXPECT_LE(max_norm(ComplexMatrix(lhs - rhs)), 1e-10 * max_norm(A));
    for (Eigen::Index j = 0; j < n; ++j) EXPECT_NEAR(d.vectors.col(j).norm(), 1.0, 1e-12);
  }
}

TEST(Eigen, DefectiveJordanBlockIsFlagged) {
  RealMatrix J(2, 2);
  J << 1, 1, 0, 1;
  EXPECT_FALSE(eigen(J).diagonalizable);
}

TEST(Eigen, RejectsBadInput) {
  EXPECT_THROW(eigen(RealMatrix(2, 3)), InvalidParam);
  EXPECT_THROW(eigen(RealMatrix(RealMatrix::Identity(9, 9))), InvalidParam);
  RealMatrix M = RealMatrix::Identity(2, 2);
  M(0, 1) = NAN;
  EXPECT_THROW(eigen(M), InvalidParam);
}

TEST(Det, TrivialCases) {
  EXPECT_DOUBLE_EQ(det(RealMatrix(RealMatrix::Identity(3, 3))), 1.0);
  RealMatrix r1(2, 2);
  r1 << 1, 2, 2, 4;
  EXPECT_NEAR(det(r1), 0.0, 1e-15);
  EXPECT_LT(std::abs(det(ComplexMatrix(ComplexMatrix::Identity(3, 3))) - 1.0), 1e-15);
}

TEST(Det, MatchesCofactorOracle) {
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    const RealMatrix M = rng.matrix(3, 2.0);
    EXPECT_NEAR(det(M), oracle::cofactor_det<double>(M), 1e-12);
    const ComplexMatrix C = (rng.matrix(3) + Complex(0, 1) * rng.matrix(3)).eval();
    EXPECT_LT(std::abs(det(C) - oracle::cofactor_det<Complex>(C)), 1e-12);
  }
}

TEST(Det, EqualsProductOfEigenvalues) {
  Rng rng(43);
  for (int i = 0; i < 50; ++i) {
    const RealMatrix M = rng.matrix(4, 2.0);
    const EigenDecomp d = eigen(M);
    ASSERT_TRUE(d.diagonalizable);
    const Complex prod = d.values.prod();
    const double value = det(M);
    EXPECT_LE(std::abs(prod - value), 1e-9 * std::max(1.0, std::abs(value)));
  }
}

TEST(Inverse, DiagonalAndIdentity) {
  RealMatrix D = RealMatrix::Zero(2, 2);
  D.diagonal() << 2, 4;
  const RealMatrix inv = inverse(D);
  EXPECT_DOUBLE_EQ(inv(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(inv(1, 1), 0.25);
  EXPECT_EQ(inv(0, 1), 0.0);
  EXPECT_EQ(inverse(RealMatrix(RealMatrix::Identity(3, 3))), RealMatrix::Identity(3, 3));
}

TEST(Inverse, ResidualAndInvolution) {
  Rng rng(47);
  for (int i = 0; i < 50; ++i) {
    const RealMatrix M = rng.matrix(4) + 4.0 * RealMatrix::Identity(4, 4);
    const RealMatrix inv = inverse(M);
    EXPECT_LT(max_norm(RealMatrix(M * inv - RealMatrix::Identity(4, 4))), 1e-10);
    EXPECT_LT(max_norm(RealMatrix(inverse(inv) - M)), 1e-9 * max_norm(M));
    const ComplexMatrix C = (M.cast<Complex>() + Complex(0, 0.5) * rng.matrix(4)).eval();
    EXPECT_LT(max_norm(ComplexMatrix(C * inverse(C) - ComplexMatrix::Identity(4, 4))), 1e-10);
  }
}

TEST(Inverse, SingularThrows) {
  RealMatrix r1(2, 2);
  r1 << 1, 2, 2, 4;
  EXPECT_THROW(inverse(r1), SingularError);
  EXPECT_THROW(inverse(RealMatrix(RealMatrix::Zero(3, 3))), SingularError);
  EXPECT_DOUBLE_EQ(tol_singular(r1), 1e-10 * 4.0 * 2.0);
}

TEST(KernelImage, ZeroMatrix) {
  const RealMatrix Z = RealMatrix::Zero(3, 3);
  EXPECT_EQ(kernel_basis(Z, 1e-10).dim(), 3);
  EXPECT_EQ(image_basis(Z, 1e-10).dim(), 0);
}

TEST(KernelImage, RankTwoProduct) {
  Rng rng(53);
  for (int i = 0; i < 50; ++i) {
    const RealMatrix M = rng.matrix(4).leftCols(2) * rng.matrix(4).topRows(2);
    const RealBasis ker = kernel_basis(M, 1e-10), img = image_basis(M, 1e-10);
    EXPECT_EQ(ker.dim(), 2);
    EXPECT_EQ(img.dim(), 2);
    EXPECT_EQ(rank(M, 1e-10) + ker.dim(), 4);
    EXPECT_LT(orthonormality_gap(ker.vectors), 1e-12);
    EXPECT_LT(orthonormality_gap(img.vectors), 1e-12);
    for (Eigen::Index j = 0; j < ker.dim(); ++j)
      EXPECT_LE((M * ker.vectors.col(j)).norm(), ker.tol_used * sigma_max(M) + 1e-15);
    // Every column of M lies in the image.
    for (Eigen::Index j = 0; j < 4; ++j)
      EXPECT_LT(distance_to_span(img, M.col(j)), 1e-10 * std::max(1.0, M.col(j).norm()));
  }
}

TEST(KernelImage, RankNullityOnRandomRanks) {
  Rng rng(59);
  for (int i = 0; i < 60; ++i) {
    const auto n = static_cast<Eigen::Index>(rng.uniform(1, 9));
    const auto r = static_cast<Eigen::Index>(rng.uniform(0, static_cast<double>(n) + 1));
    const RealMatrix M = rng.matrix(n).leftCols(r) * rng.matrix(n).topRows(r);
    EXPECT_EQ(kernel_basis(M, 1e-9).dim() + image_basis(M, 1e-9).dim(), n);
    EXPECT_EQ(image_basis(M, 1e-9).dim(), r);
  }
}

TEST(KernelImage, ComplexOverload) {
  ComplexMatrix M(2, 2);
  M << Complex(1, 1), Complex(2, 2), Complex(1, 0), Complex(2, 0);
  const ComplexBasis ker = kernel_basis(M, 1e-10);
  ASSERT_EQ(ker.dim(), 1);
  EXPECT_LT((M * ker.vectors.col(0)).norm(), 1e-12);
  EXPECT_EQ(image_basis(M, 1e-10).dim(), 1);
}

TEST(KernelImage, CollapsedOperatorWithReferenceScale) {
  // Block diag(eps * rotation, c): relative to 1 the 2x2 block is zero.
  RealMatrix M = RealMatrix::Zero(3, 3);
  M.topLeftCorner(2, 2) = 1e-12 * testing_support::rotation();
  M(2, 2) = 0.37;
  const RealBasis ker = kernel_basis(M, 1e-6, 1.0);
  const RealBasis img = image_basis(M, 1e-6, 1.0);
  ASSERT_EQ(ker.dim(), 2);
  ASSERT_EQ(img.dim(), 1);
  for (Eigen::Index j = 0; j < 2; ++j) EXPECT_LT(std::abs(ker.vectors(2, j)), 1e-12);
  EXPECT_NEAR(std::abs(img.vectors(2, 0)), 1.0, 1e-12);
}

TEST(TruncatedSolve, MinimumNormSolution) {
  RealMatrix M = RealMatrix::Zero(3, 3);
  M(2, 2) = 2.0;
  const Vector x = truncated_solve(M, testing_support::vec({0, 0, 3}), 1e-6, 1.0);
  EXPECT_LT((x - testing_support::vec({0, 0, 1.5})).norm(), 1e-15);
}
