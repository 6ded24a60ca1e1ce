#include "mvgp/linalg.hpp"

#include <cmath>

namespace mvgp {

namespace {

// Plain lower Cholesky; returns false on a nonpositive or nonfinite pivot.
bool try_cholesky(const Matrix& a, Matrix* lower) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return false;
  Matrix l = llt.matrixL();
  for (Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return false;
  }
  *lower = std::move(l);
  return true;
}

}  // namespace

double SpdFactor::log_det() const {
  double s = 0.0;
  for (Index i = 0; i < lower_.rows(); ++i) s += std::log(lower_(i, i));
  return 2.0 * s;
}

Matrix SpdFactor::solve(const Matrix& rhs) const {
  Matrix x = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(x);
}

Matrix SpdFactor::solve_lower(const Matrix& rhs) const {
  return lower_.triangularView<Eigen::Lower>().solve(rhs);
}

SpdFactor factorize(const Matrix& a, FactorizePolicy policy) {
  require(a.rows() == a.cols(), "factorize: matrix must be square");
  Matrix lower;
  if (try_cholesky(a, &lower)) return SpdFactor(std::move(lower), 0.0);
  if (policy == FactorizePolicy::RequireStrict) {
    throw DegenerateCovarianceError(
        "covariance is not strictly positive definite (density is undefined "
        "on a degenerate support)");
  }
  double scale = a.diagonal().mean();
  if (!(scale > 0.0)) scale = 1.0;
  for (double eps = 1e-10; eps <= 1e-6 * 1.0000001; eps *= 10.0) {
    double jitter = eps * scale;
    Matrix jittered = a + jitter * Matrix::Identity(a.rows(), a.cols());
    if (try_cholesky(jittered, &lower)) return SpdFactor(std::move(lower), jitter);
  }
  throw FactorizationError(
      "Cholesky failed after jitter escalation to 1e-6*mean(diag); input is "
      "not positive semi-definite");
}

SpdMatrix::SpdMatrix(Matrix entries) : entries_(std::move(entries)) {
  require(entries_.rows() == entries_.cols() && entries_.rows() >= 1,
          "SpdMatrix: entries must be square and nonempty");
  for (Index i = 0; i < entries_.rows(); ++i) {
    for (Index j = i + 1; j < entries_.cols(); ++j) {
      double tol = 1e-12 * std::max(1.0, std::abs(entries_(i, j)));
      if (std::abs(entries_(i, j) - entries_(j, i)) > tol) {
        throw ValidationError("SpdMatrix: entries are not symmetric at (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  factorize(entries_, FactorizePolicy::AllowJitter);  // PSD check
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& m) {
  Vector v(m.size());
  Index k = 0;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) v(k++) = m(i, j);
  }
  return v;
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  require(v.size() == rows * cols, "unvec: size mismatch");
  Matrix m(rows, cols);
  Index k = 0;
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = v(k++);
  }
  return m;
}

}  // namespace mvgp
