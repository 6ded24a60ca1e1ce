#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mvgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Validation failure (bad dimensions, asymmetry, malformed input).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: Cholesky did not succeed within the jitter ladder.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance is numerically rank-deficient where a strictly positive
/// definite matrix is required (density evaluation).
class DegenerateCovarianceError : public FactorizationError {
 public:
  using FactorizationError::FactorizationError;
};

enum class FactorizePolicy {
  RequireStrict,  // unjittered Cholesky must succeed
  AllowJitter,    // escalate eps*mean(diag) through 1e-10..1e-6
};

/// Lower-triangular Cholesky factor of an SPD matrix (possibly of the
/// jittered matrix when the policy allows it).
class SpdFactor {
 public:
  SpdFactor(Matrix lower, double jitter)
      : lower_(std::move(lower)), jitter_(jitter) {}

  const Matrix& lower() const { return lower_; }
  Index dim() const { return lower_.rows(); }
  double jitter() const { return jitter_; }

  /// log det of the factored matrix: 2 * sum(log diag(L)).
  double log_det() const;

  /// Solves A x = b with A = L L^T.
  Matrix solve(const Matrix& rhs) const;

  /// Solves L x = b (forward substitution only).
  Matrix solve_lower(const Matrix& rhs) const;

 private:
  Matrix lower_;
  double jitter_;
};

/// Cholesky with the jitter ladder. Attempts eps = 0 first, then
/// eps*mean(diag) for eps = 1e-10, 1e-9, ..., 1e-6. RequireStrict accepts
/// only the unjittered attempt and throws DegenerateCovarianceError
/// otherwise; AllowJitter throws FactorizationError past the ladder.
SpdFactor factorize(const Matrix& a, FactorizePolicy policy);

/// Symmetric positive semi-definite matrix. Construction validates
/// symmetry (1e-12 relative) and factorizability under the jitter ladder.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix entries);

  Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }

  SpdFactor factor(FactorizePolicy policy = FactorizePolicy::AllowJitter) const {
    return factorize(entries_, policy);
  }

  static SpdMatrix identity(Index dim) {
    return SpdMatrix(Matrix::Identity(dim, dim));
  }

 private:
  Matrix entries_;
};

/// Kronecker product: block (i,j) of the result is a(i,j) * b.
Matrix kronecker(const Matrix& a, const Matrix& b);

/// Column-stacking vectorisation.
Vector vec(const Matrix& m);

/// Inverse of vec: reshape a column-stacked vector to rows x cols.
Matrix unvec(const Vector& v, Index rows, Index cols);

inline void require(bool cond, const std::string& message) {
  if (!cond) throw ValidationError(message);
}

}  // namespace mvgp
