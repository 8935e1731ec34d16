#pragma once

#include <optional>
#include <vector>

#include "fractrace/linalg.hpp"
#include "fractrace/scalar_ml.hpp"

namespace fractrace {

enum class OperatorMethod { eigen_path, series_path };

const char* to_string(OperatorMethod m);

/// Which evaluation route ml_matrix should take. `automatic` uses the
/// eigendecomposition when A is diagonalizable and the power series otherwise.
enum class PathChoice { automatic, eigen, series };

/// E_{alpha,beta}(t^alpha A) for a real square A.
struct MLOperator {
  MLParams params;
  double t = 0.0;
  RealMatrix A;
  RealMatrix matrix;
  OperatorMethod method = OperatorMethod::eigen_path;
  /// Series path only: the term growth or the precision cap left the result
  /// with less than ~1e-9 relative accuracy.
  bool accuracy_warning = false;
};

/// Throws InvalidParam for t < 0 or a bad matrix, DomainError when t^alpha A
/// leaves the scalar evaluation domain (spectral radius on the eigen path,
/// infinity norm on the series path), NonConvergence when the eigen path
/// produces a visibly complex result.
MLOperator ml_matrix(const MLParams& p, double t, const RealMatrix& A,
                     PathChoice path = PathChoice::automatic);

struct EigenvalueImage {
  Complex lambda;    // eigenvalue of A
  Complex expected;  // E_{alpha,beta}(t^alpha lambda)
  Complex observed;  // matched eigenvalue of the operator
};

struct EigenvalueMap {
  std::vector<EigenvalueImage> pairs;
  double max_mismatch = 0.0;  // max |expected - observed| / max(1, |expected|)
};

/// Compares the spectrum of E_{alpha,beta}(t^alpha A) with the scalar function
/// applied to the spectrum of A (greedy nearest matching). Throws
/// InvalidParam when A is not diagonalizable.
EigenvalueMap eigenvalue_map_check(const MLParams& p, double t, const RealMatrix& A);

/// An eigenvalue of A whose ray carries a zero of E_{alpha,1}, with the time
/// T at which t^alpha lambda reaches that zero.
struct CriticalPair {
  Complex eigenvalue;
  Complex zero;
  double T = 0.0;
};

struct InvertibilityReport {
  double t = 0.0;
  Complex det_value;
  bool invertible = true;
  std::optional<CriticalPair> nearest_critical;
};

/// det E_{alpha,beta}(t^alpha A) on each grid point, sorted by t. When
/// critical pairs are supplied, each report carries the one with T closest to t.
std::vector<InvertibilityReport> invertibility_scan(const MLParams& p, const RealMatrix& A,
                                                    std::vector<double> t_grid,
                                                    const std::vector<CriticalPair>& criticals = {});

}  // namespace fractrace
