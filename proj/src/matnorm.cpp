#include "mvgp/matnorm.hpp"

#include "mvgp/rng.hpp"

#include <cmath>
#include <utility>

namespace mvgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr std::uint64_t kSampleStream = 0x6d617473616d70ULL;  // "matsamp"

void check_partition(const AxisPartition& part, Index axis_len) {
  require(part.first_block_size >= 1 && part.first_block_size < axis_len,
          "AxisPartition: first_block_size must be in [1, axis length)");
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

MatrixNormal::MatrixNormal(Matrix mean, SpdMatrix row_cov, SpdMatrix col_cov)
    : mean_(std::move(mean)),
      row_cov_(std::move(row_cov)),
      col_cov_(std::move(col_cov)) {
  require(row_cov_.dim() == mean_.rows(),
          "MatrixNormal: row_cov dim must equal mean rows");
  require(col_cov_.dim() == mean_.cols(),
          "MatrixNormal: col_cov dim must equal mean cols");
}

double log_density(const MatrixNormal& mn, const Matrix& x) {
  require(x.rows() == mn.rows() && x.cols() == mn.cols(),
          "log_density: X dimensions must match the distribution");
  const double n = static_cast<double>(mn.rows());
  const double d = static_cast<double>(mn.cols());
  SpdFactor row = mn.row_cov().factor(FactorizePolicy::RequireStrict);
  SpdFactor col = mn.col_cov().factor(FactorizePolicy::RequireStrict);
  // tr(Lambda^-1 (X-M)^T Sigma^-1 (X-M)) = ||Ls^-1 (X-M) Ll^-T||_F^2
  Matrix centered = x - mn.mean();
  Matrix half = row.solve_lower(centered);
  Matrix whitened = col.solve_lower(half.transpose());
  double quad = whitened.squaredNorm();
  return -0.5 * (n * d * kLog2Pi + d * row.log_det() + n * col.log_det() +
                 quad);
}

double mvn_log_density(const MultivariateNormalSpec& spec, const Vector& x) {
  require(x.size() == spec.mean.size(),
          "mvn_log_density: dimension mismatch");
  SpdFactor f = spec.cov.factor(FactorizePolicy::RequireStrict);
  Vector centered = x - spec.mean;
  Vector whitened = f.solve_lower(centered);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + f.log_det() +
                 whitened.squaredNorm());
}

MultivariateNormalSpec vec_distribution(const MatrixNormal& mn) {
  return {vec(mn.mean()),
          SpdMatrix(kronecker(mn.col_cov().entries(), mn.row_cov().entries()))};
}

MultivariateNormalSpec vec_transposed_distribution(const MatrixNormal& mn) {
  return {vec(mn.mean().transpose()),
          SpdMatrix(kronecker(mn.row_cov().entries(), mn.col_cov().entries()))};
}

std::vector<Matrix> sample(const MatrixNormal& mn, int count,
                           std::uint64_t seed) {
  require(count >= 1, "sample: count must be >= 1");
  SpdFactor row = mn.row_cov().factor(FactorizePolicy::AllowJitter);
  SpdFactor col = mn.col_cov().factor(FactorizePolicy::AllowJitter);
  std::vector<Matrix> draws;
  draws.reserve(static_cast<std::size_t>(count));
  Matrix z(mn.rows(), mn.cols());
  for (int r = 0; r < count; ++r) {
    rng::NormalStream stream(
        rng::substream(seed, kSampleStream, static_cast<std::uint64_t>(r)));
    stream.fill(z);
    draws.push_back(mn.mean() + row.lower() * z * col.lower().transpose());
  }
  return draws;
}

Matrix schur_complement(const SpdMatrix& a, Index first_block_size) {
  const Index n = a.dim();
  check_partition({Axis::Rows, first_block_size}, n);
  const Index n1 = first_block_size;
  const Index n2 = n - n1;
  const Matrix& m = a.entries();
  Matrix a11 = m.topLeftCorner(n1, n1);
  Matrix a12 = m.topRightCorner(n1, n2);
  Matrix a21 = m.bottomLeftCorner(n2, n1);
  Matrix a22 = m.bottomRightCorner(n2, n2);
  SpdFactor f = factorize(a11, FactorizePolicy::AllowJitter);
  return symmetrized(a22 - a21 * f.solve(a12));
}

MatrixNormal marginal(const MatrixNormal& mn, const AxisPartition& part,
                      Block keep) {
  if (part.axis == Axis::Rows) {
    check_partition(part, mn.rows());
    const Index n1 = part.first_block_size;
    const Index n2 = mn.rows() - n1;
    const Matrix& sigma = mn.row_cov().entries();
    if (keep == Block::First) {
      return MatrixNormal(mn.mean().topRows(n1),
                          SpdMatrix(sigma.topLeftCorner(n1, n1)),
                          mn.col_cov());
    }
    return MatrixNormal(mn.mean().bottomRows(n2),
                        SpdMatrix(sigma.bottomRightCorner(n2, n2)),
                        mn.col_cov());
  }
  check_partition(part, mn.cols());
  const Index d1 = part.first_block_size;
  const Index d2 = mn.cols() - d1;
  const Matrix& lambda = mn.col_cov().entries();
  if (keep == Block::First) {
    return MatrixNormal(mn.mean().leftCols(d1), mn.row_cov(),
                        SpdMatrix(lambda.topLeftCorner(d1, d1)));
  }
  return MatrixNormal(mn.mean().rightCols(d2), mn.row_cov(),
                      SpdMatrix(lambda.bottomRightCorner(d2, d2)));
}

MatrixNormal condition(const MatrixNormal& mn, const AxisPartition& part,
                       const Matrix& observed) {
  if (part.axis == Axis::Rows) {
    check_partition(part, mn.rows());
    const Index n1 = part.first_block_size;
    const Index n2 = mn.rows() - n1;
    require(observed.rows() == n1 && observed.cols() == mn.cols(),
            "condition: observed must match the first row block");
    const Matrix& sigma = mn.row_cov().entries();
    Matrix s11 = sigma.topLeftCorner(n1, n1);
    Matrix s12 = sigma.topRightCorner(n1, n2);
    Matrix s21 = sigma.bottomLeftCorner(n2, n1);
    SpdFactor f = factorize(s11, FactorizePolicy::AllowJitter);
    Matrix mean = mn.mean().bottomRows(n2) +
                  s21 * f.solve(observed - mn.mean().topRows(n1));
    Matrix cov = symmetrized(sigma.bottomRightCorner(n2, n2) -
                             s21 * f.solve(s12));
    return MatrixNormal(std::move(mean), SpdMatrix(std::move(cov)),
                        mn.col_cov());
  }
  check_partition(part, mn.cols());
  const Index d1 = part.first_block_size;
  const Index d2 = mn.cols() - d1;
  require(observed.rows() == mn.rows() && observed.cols() == d1,
          "condition: observed must match the first column block");
  const Matrix& lambda = mn.col_cov().entries();
  Matrix l11 = lambda.topLeftCorner(d1, d1);
  Matrix l12 = lambda.topRightCorner(d1, d2);
  Matrix l21 = lambda.bottomLeftCorner(d2, d1);
  SpdFactor f = factorize(l11, FactorizePolicy::AllowJitter);
  // (X1c - M1c) L11^-1 L12
  Matrix mean = mn.mean().rightCols(d2) +
                (observed - mn.mean().leftCols(d1)) * f.solve(l12);
  Matrix cov = symmetrized(lambda.bottomRightCorner(d2, d2) -
                           l21 * f.solve(l12));
  return MatrixNormal(std::move(mean), mn.row_cov(),
                      SpdMatrix(std::move(cov)));
}

namespace {

std::vector<Index> checked_perm(const std::vector<Index>& perm, Index len) {
  require(static_cast<Index>(perm.size()) == len,
          "permutation size must match axis length");
  std::vector<bool> seen(perm.size(), false);
  for (Index p : perm) {
    require(p >= 0 && p < len && !seen[static_cast<std::size_t>(p)],
            "permutation must be a bijection on [0, len)");
    seen[static_cast<std::size_t>(p)] = true;
  }
  return perm;
}

}  // namespace

MatrixNormal permute_rows(const MatrixNormal& mn,
                          const std::vector<Index>& perm) {
  auto p = checked_perm(perm, mn.rows());
  Matrix mean(mn.rows(), mn.cols());
  Matrix sigma(mn.rows(), mn.rows());
  const Matrix& s = mn.row_cov().entries();
  for (Index i = 0; i < mn.rows(); ++i) {
    mean.row(i) = mn.mean().row(p[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < mn.rows(); ++j) {
      sigma(i, j) = s(p[static_cast<std::size_t>(i)],
                      p[static_cast<std::size_t>(j)]);
    }
  }
  return MatrixNormal(std::move(mean), SpdMatrix(std::move(sigma)),
                      mn.col_cov());
}

MatrixNormal permute_cols(const MatrixNormal& mn,
                          const std::vector<Index>& perm) {
  auto p = checked_perm(perm, mn.cols());
  Matrix mean(mn.rows(), mn.cols());
  Matrix lambda(mn.cols(), mn.cols());
  const Matrix& l = mn.col_cov().entries();
  for (Index j = 0; j < mn.cols(); ++j) {
    mean.col(j) = mn.mean().col(p[static_cast<std::size_t>(j)]);
    for (Index i = 0; i < mn.cols(); ++i) {
      lambda(j, i) = l(p[static_cast<std::size_t>(j)],
                       p[static_cast<std::size_t>(i)]);
    }
  }
  return MatrixNormal(std::move(mean), mn.row_cov(),
                      SpdMatrix(std::move(lambda)));
}

}  // namespace mvgp
