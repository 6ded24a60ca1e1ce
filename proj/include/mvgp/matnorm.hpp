#pragma once

#include "mvgp/linalg.hpp"

#include <cstdint>
#include <vector>

namespace mvgp {

/// Matrix-variate normal law over n x d matrices: n x d mean, n x n
/// among-row covariance Sigma, d x d among-column covariance Lambda.
/// Under column stacking, vec(X) ~ N(vec(M), Lambda (x) Sigma).
class MatrixNormal {
 public:
  MatrixNormal(Matrix mean, SpdMatrix row_cov, SpdMatrix col_cov);

  Index rows() const { return mean_.rows(); }
  Index cols() const { return mean_.cols(); }
  const Matrix& mean() const { return mean_; }
  const SpdMatrix& row_cov() const { return row_cov_; }
  const SpdMatrix& col_cov() const { return col_cov_; }

 private:
  Matrix mean_;
  SpdMatrix row_cov_;
  SpdMatrix col_cov_;
};

/// A plain multivariate normal, used as the vec-equivalent of a
/// MatrixNormal and as the oracle target in tests.
struct MultivariateNormalSpec {
  Vector mean;
  SpdMatrix cov;
};

enum class Axis { Rows, Cols };
enum class Block { First, Second };

/// Leading-block partition of one axis; arbitrary index selection is done
/// by permuting first (permute_rows / permute_cols).
struct AxisPartition {
  Axis axis;
  Index first_block_size;
};

/// Matrix-form log density
///   -(nd/2) ln 2pi - (d/2) ln|Sigma| - (n/2) ln|Lambda|
///   - 1/2 tr(Lambda^-1 (X-M)^T Sigma^-1 (X-M)).
/// Rejects covariances that are not strictly positive definite.
double log_density(const MatrixNormal& mn, const Matrix& x);

/// Log density of a plain multivariate normal.
double mvn_log_density(const MultivariateNormalSpec& spec, const Vector& x);

/// vec(X) ~ N(vec(M), Lambda (x) Sigma) under column stacking.
MultivariateNormalSpec vec_distribution(const MatrixNormal& mn);

/// vec(X^T) ~ N(vec(M^T), Sigma (x) Lambda); the transpose-vec convention
/// used by the predictive covariance of the regression module.
MultivariateNormalSpec vec_transposed_distribution(const MatrixNormal& mn);

/// Draws `count` matrices X = M + A Z B^T with A A^T = Sigma, B B^T =
/// Lambda, Z iid standard normal. Deterministic per seed; draw r uses the
/// substream (seed, stream, r), so draws are order-independent.
std::vector<Matrix> sample(const MatrixNormal& mn, int count,
                           std::uint64_t seed);

/// A22 - A21 A11^-1 A12 for the leading block of size first_block_size.
Matrix schur_complement(const SpdMatrix& a, Index first_block_size);

/// Row/column marginal per the block partition: dropping rows keeps
/// Lambda, dropping columns keeps Sigma.
MatrixNormal marginal(const MatrixNormal& mn, const AxisPartition& part,
                      Block keep);

/// Law of the second block given the observed first block:
///   rows: MN(M2 + S21 S11^-1 (X1-M1), S22.1, Lambda)
///   cols: MN(M2 + (X1-M1) L11^-1 L12, Sigma, L22.1).
MatrixNormal condition(const MatrixNormal& mn, const AxisPartition& part,
                       const Matrix& observed);

/// Reorders rows (and Sigma) by `perm`; companion to the leading-block
/// partition interface.
MatrixNormal permute_rows(const MatrixNormal& mn,
                          const std::vector<Index>& perm);
MatrixNormal permute_cols(const MatrixNormal& mn,
                          const std::vector<Index>& perm);

}  // namespace mvgp
