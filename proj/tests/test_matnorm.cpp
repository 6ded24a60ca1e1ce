#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mvgp/matnorm.hpp"
#include "mvgp/rng.hpp"

#include <cmath>

using namespace mvgp;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Brute-force Kronecker per the definition's double loop; the test-side
// oracle for vec_distribution and the vec-equivalence checks.
Matrix kron_loop(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

struct Inst {
  std::mt19937_64 gen;
  rng::NormalStream normals;
  explicit Inst(std::uint64_t s) : gen(s), normals(rng::mix(s, 9)) {}
  Matrix randn(Index r, Index c) {
    Matrix m(r, c);
    normals.fill(m);
    return m;
  }
  Matrix spd(Index n) {
    Matrix a = randn(n, n);
    return a * a.transpose() + Matrix::Identity(n, n);
  }
  Index idx(Index lo, Index hi) {
    return lo + static_cast<Index>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

}  // namespace

TEST_CASE("log_density: frozen scalar and iid values") {
  // scalar standard normal at its mean: -0.5 ln(2 pi)
  MatrixNormal scalar(Matrix::Zero(1, 1), SpdMatrix::identity(1),
                      SpdMatrix::identity(1));
  CHECK(log_density(scalar, Matrix::Zero(1, 1)) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));

  // four iid standard normals at zero: -2 ln(2 pi)
  MatrixNormal iid(Matrix::Zero(2, 2), SpdMatrix::identity(2),
                   SpdMatrix::identity(2));
  CHECK(log_density(iid, Matrix::Zero(2, 2)) ==
        doctest::Approx(-3.6757541328186907).epsilon(1e-12));

  // bivariate normal by hand: det Sigma = 3, zero quadratic form
  MatrixNormal biv(Matrix::Zero(2, 1), SpdMatrix(mat2(2, 1, 1, 2)),
                   SpdMatrix::identity(1));
  double expected = -std::log(2.0 * 3.14159265358979323846) - 0.5 * std::log(3.0);
  CHECK(log_density(biv, Matrix::Zero(2, 1)) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log_density rejects degenerate covariances") {
  Matrix singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;  // rank 1
  MatrixNormal mn(Matrix::Zero(2, 1), SpdMatrix(singular),
                  SpdMatrix::identity(1));
  CHECK_THROWS_AS(log_density(mn, Matrix::Zero(2, 1)),
                  DegenerateCovarianceError);
  CHECK_THROWS_AS(log_density(mn, Matrix::Zero(3, 1)), ValidationError);
}

TEST_CASE("vec_distribution: trivial Kronecker shapes") {
  MatrixNormal tiny(Matrix::Zero(1, 1), SpdMatrix(Matrix::Constant(1, 1, 3.0)),
                    SpdMatrix(Matrix::Constant(1, 1, 0.5)));
  CHECK(vec_distribution(tiny).cov.entries()(0, 0) == doctest::Approx(1.5));

  MatrixNormal eye(Matrix::Zero(2, 3), SpdMatrix::identity(2),
                   SpdMatrix::identity(3));
  CHECK((vec_distribution(eye).cov.entries() - Matrix::Identity(6, 6))
            .cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vec_distribution matches the loop-computed Kronecker product") {
  Matrix sigma = mat2(2, 1, 1, 2);
  Matrix lambda = mat2(1, 0.5, 0.5, 1);
  MatrixNormal mn(Matrix::Zero(2, 2), SpdMatrix(sigma), SpdMatrix(lambda));
  MultivariateNormalSpec spec = vec_distribution(mn);
  CHECK((spec.cov.entries() - kron_loop(lambda, sigma)).cwiseAbs().maxCoeff() ==
        0.0);
  // transpose-vec convention
  MultivariateNormalSpec tspec = vec_transposed_distribution(mn);
  CHECK((tspec.cov.entries() - kron_loop(sigma, lambda)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("vec equivalence on 100 random instances") {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Inst inst(rng::substream(7, 11, static_cast<std::uint64_t>(i)));
    Index n = inst.idx(1, 5), d = inst.idx(1, 5);
    Matrix m = inst.randn(n, d);
    MatrixNormal mn(m, SpdMatrix(inst.spd(n)), SpdMatrix(inst.spd(d)));
    Matrix x = m + inst.randn(n, d);
    MultivariateNormalSpec spec = vec_distribution(mn);
    double diff = std::abs(log_density(mn, x) -
                           mvn_log_density(spec, vec(x)));
    worst = std::max(worst, diff);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("sampling: determinism, mean, and second moment") {
  MatrixNormal mn(Matrix::Constant(2, 2, 7.0), SpdMatrix::identity(2),
                  SpdMatrix::identity(2));
  auto a = sample(mn, 3, 42);
  auto b = sample(mn, 3, 42);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].array() == b[i].array()).all());
  }
  auto c = sample(mn, 3, 43);
  CHECK((a[0].array() != c[0].array()).any());

  const int count = 100000;
  auto draws = sample(mn, count, 1);
  Matrix mean = Matrix::Zero(2, 2);
  Matrix second = Matrix::Zero(2, 2);
  for (const Matrix& x : draws) {
    mean += x;
    Matrix centered = x - mn.mean();
    second += centered.transpose() * centered;
  }
  mean /= count;
  second /= count;
  // entrywise MC bound: 3 / sqrt(count) for unit variances
  CHECK((mean.array() - 7.0).abs().maxCoeff() <= 3.0 / std::sqrt(double(count)));
  // E[(X-M)^T (X-M)] = tr(Sigma) Lambda = 2 I; per-draw spread is a few
  // units, so 2% of the diagonal dominates 3 SE here
  CHECK((second / 2.0 - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("sampling succeeds on a rank-deficient covariance via jitter") {
  Matrix singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;  // degenerate direction (1,-1)
  MatrixNormal mn(Matrix::Zero(2, 1), SpdMatrix(singular),
                  SpdMatrix::identity(1));
  auto draws = sample(mn, 2000, 5);
  double worst = 0.0;
  for (const Matrix& x : draws) {
    worst = std::max(worst, std::abs(x(0, 0) - x(1, 0)));
  }
  // samples stay near the degenerate subspace x0 == x1
  CHECK(worst <= 1e-2);
}

TEST_CASE("schur_complement: hand values and PSD preservation") {
  CHECK(schur_complement(SpdMatrix(mat2(2, 1, 1, 2)), 1)(0, 0) ==
        doctest::Approx(1.5).epsilon(1e-15));

  CHECK((schur_complement(SpdMatrix::identity(4), 2) - Matrix::Identity(2, 2))
            .cwiseAbs().maxCoeff() == 0.0);

  // block-diagonal: zero cross block leaves A22 untouched
  Matrix a = Matrix::Zero(4, 4);
  a.topLeftCorner(2, 2) = mat2(2, 1, 1, 2);
  a.bottomRightCorner(2, 2) = mat2(3, 0.5, 0.5, 1);
  Matrix s = schur_complement(SpdMatrix(a), 2);
  CHECK((s - mat2(3, 0.5, 0.5, 1)).cwiseAbs().maxCoeff() == 0.0);

  for (int i = 0; i < 10; ++i) {
    Inst inst(rng::substream(3, 21, static_cast<std::uint64_t>(i)));
    Index n = inst.idx(2, 6);
    Matrix spd = inst.spd(n);
    Matrix sc = schur_complement(SpdMatrix(spd), inst.idx(1, n - 1));
    CHECK_NOTHROW(SpdMatrix{sc});  // symmetric PSD invariant holds
  }
}

TEST_CASE("marginal: sub-block extraction") {
  Inst inst(99);
  Matrix m = inst.randn(3, 2);
  Matrix sigma = inst.spd(3);
  Matrix lambda = inst.spd(2);
  MatrixNormal mn(m, SpdMatrix(sigma), SpdMatrix(lambda));

  MatrixNormal first = marginal(mn, {Axis::Rows, 1}, Block::First);
  CHECK((first.mean() - m.topRows(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(first.row_cov().entries()(0, 0) == sigma(0, 0));
  CHECK((first.col_cov().entries() - lambda).cwiseAbs().maxCoeff() == 0.0);

  MatrixNormal second = marginal(mn, {Axis::Rows, 1}, Block::Second);
  CHECK((second.row_cov().entries() - sigma.bottomRightCorner(2, 2))
            .cwiseAbs().maxCoeff() == 0.0);

  // nested marginals equal direct sub-block selection
  MatrixNormal twice = marginal(marginal(mn, {Axis::Rows, 2}, Block::First),
                                {Axis::Rows, 1}, Block::First);
  CHECK((twice.mean() - first.mean()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((twice.row_cov().entries() - first.row_cov().entries())
            .cwiseAbs().maxCoeff() == 0.0);

  // columns: keep Sigma, take Lambda block
  MatrixNormal colm = marginal(mn, {Axis::Cols, 1}, Block::First);
  CHECK((colm.row_cov().entries() - sigma).cwiseAbs().maxCoeff() == 0.0);
  CHECK(colm.col_cov().entries()(0, 0) == lambda(0, 0));

  CHECK_THROWS_AS(marginal(mn, {Axis::Rows, 3}, Block::First),
                  ValidationError);
}

TEST_CASE("marginal log-density equals the vec-Gaussian sub-vector marginal") {
  Inst inst(123);
  Matrix m = inst.randn(4, 3);
  MatrixNormal mn(m, SpdMatrix(inst.spd(4)), SpdMatrix(inst.spd(3)));
  Matrix x = m + inst.randn(4, 3);
  Index n1 = 2;

  MatrixNormal part = marginal(mn, {Axis::Rows, n1}, Block::First);
  double lhs = log_density(part, x.topRows(n1));

  // closed-form sub-vector marginal of the vec Gaussian: gather the
  // coordinates of the first n1 rows
  MultivariateNormalSpec big = vec_distribution(mn);
  std::vector<Index> keep;
  for (Index a = 0; a < 3; ++a)
    for (Index i = 0; i < n1; ++i) keep.push_back(a * 4 + i);
  const auto k = static_cast<Index>(keep.size());
  Vector mu(k);
  Matrix cov(k, k);
  Vector xs(k);
  Vector xfull = vec(x);
  for (Index i = 0; i < k; ++i) {
    mu(i) = big.mean(keep[static_cast<std::size_t>(i)]);
    xs(i) = xfull(keep[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < k; ++j) {
      cov(i, j) = big.cov.entries()(keep[static_cast<std::size_t>(i)],
                                    keep[static_cast<std::size_t>(j)]);
    }
  }
  double rhs = mvn_log_density({mu, SpdMatrix(cov)}, xs);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("condition: independence and hand-computed scalar case") {
  // Sigma = I: conditioning changes nothing
  Inst inst(55);
  Matrix m = inst.randn(3, 2);
  MatrixNormal mn(m, SpdMatrix::identity(3), SpdMatrix(inst.spd(2)));
  Matrix observed = inst.randn(1, 2);
  MatrixNormal cond = condition(mn, {Axis::Rows, 1}, observed);
  CHECK((cond.mean() - m.bottomRows(2)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((cond.row_cov().entries() - Matrix::Identity(2, 2))
            .cwiseAbs().maxCoeff() <= 1e-14);

  // scalar Gaussian conditioning by hand
  MatrixNormal biv(Matrix::Zero(2, 1), SpdMatrix(mat2(2, 1, 1, 2)),
                   SpdMatrix::identity(1));
  MatrixNormal c2 = condition(biv, {Axis::Rows, 1}, Matrix::Constant(1, 1, 1.0));
  CHECK(c2.mean()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c2.row_cov().entries()(0, 0) == doctest::Approx(1.5).epsilon(1e-15));

  CHECK_THROWS_AS(condition(biv, {Axis::Rows, 1}, Matrix::Zero(2, 1)),
                  ValidationError);
}

TEST_CASE("conditioning a 3x2 instance matches the vec-ed 6-dim Gaussian") {
  Inst inst(321);
  Matrix m = inst.randn(3, 2);
  MatrixNormal mn(m, SpdMatrix(inst.spd(3)), SpdMatrix(inst.spd(2)));
  Matrix x = m + inst.randn(3, 2);
  MatrixNormal cond = condition(mn, {Axis::Rows, 1}, x.topRows(1));

  // condition the 6-dimensional vec Gaussian on the 2 coordinates of the
  // observed row (vec indices a*3 for a=0,1) by direct block algebra
  MultivariateNormalSpec big = vec_distribution(mn);
  std::vector<Index> obs{0, 3}, rem{1, 2, 4, 5};
  Matrix c11(2, 2), c12(2, 4), c21(4, 2), c22(4, 4);
  Vector m1(2), m2(4), xo(2);
  for (int i = 0; i < 2; ++i) {
    m1(i) = big.mean(obs[i]);
    xo(i) = x(0, i);
    for (int j = 0; j < 2; ++j) c11(i, j) = big.cov.entries()(obs[i], obs[j]);
    for (int j = 0; j < 4; ++j) c12(i, j) = big.cov.entries()(obs[i], rem[j]);
  }
  for (int i = 0; i < 4; ++i) {
    m2(i) = big.mean(rem[i]);
    for (int j = 0; j < 2; ++j) c21(i, j) = big.cov.entries()(rem[i], obs[j]);
    for (int j = 0; j < 4; ++j) c22(i, j) = big.cov.entries()(rem[i], rem[j]);
  }
  Matrix c11_inv = c11.inverse();
  Vector mean_oracle = m2 + c21 * c11_inv * (xo - m1);
  Matrix cov_oracle = c22 - c21 * c11_inv * c12;

  CHECK((vec(cond.mean()) - mean_oracle).cwiseAbs().maxCoeff() <= 1e-8);
  Matrix cond_vec_cov = kron_loop(cond.col_cov().entries(),
                                  cond.row_cov().entries());
  CHECK((cond_vec_cov - cov_oracle).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("density chain rule: joint = marginal x conditional, both axes") {
  for (int i = 0; i < 20; ++i) {
    Inst inst(rng::substream(17, 31, static_cast<std::uint64_t>(i)));
    Index n = inst.idx(2, 5), d = inst.idx(2, 5);
    Matrix m = inst.randn(n, d);
    MatrixNormal mn(m, SpdMatrix(inst.spd(n)), SpdMatrix(inst.spd(d)));
    Matrix x = m + inst.randn(n, d);
    Index n1 = inst.idx(1, n - 1);
    Index d1 = inst.idx(1, d - 1);

    double joint = log_density(mn, x);
    double rows =
        log_density(marginal(mn, {Axis::Rows, n1}, Block::First), x.topRows(n1)) +
        log_density(condition(mn, {Axis::Rows, n1}, x.topRows(n1)),
                    x.bottomRows(n - n1));
    double cols =
        log_density(marginal(mn, {Axis::Cols, d1}, Block::First), x.leftCols(d1)) +
        log_density(condition(mn, {Axis::Cols, d1}, x.leftCols(d1)),
                    x.rightCols(d - d1));
    CHECK(std::abs(joint - rows) <= 1e-8);
    CHECK(std::abs(joint - cols) <= 1e-8);
  }
}

TEST_CASE("permutation utility round-trips and reorders covariance") {
  Inst inst(12);
  Matrix m = inst.randn(3, 2);
  Matrix sigma = inst.spd(3);
  MatrixNormal mn(m, SpdMatrix(sigma), SpdMatrix(inst.spd(2)));
  MatrixNormal p = permute_rows(mn, {2, 0, 1});
  CHECK(p.mean()(0, 0) == m(2, 0));
  CHECK(p.row_cov().entries()(0, 1) == sigma(2, 0));
  MatrixNormal back = permute_rows(p, {1, 2, 0});
  CHECK((back.mean() - m).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.row_cov().entries() - sigma).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(permute_rows(mn, {0, 0, 1}), ValidationError);

  MatrixNormal q = permute_cols(mn, {1, 0});
  CHECK(q.mean()(0, 0) == m(0, 1));
  CHECK(q.col_cov().entries()(0, 0) == mn.col_cov().entries()(1, 1));
  MatrixNormal qback = permute_cols(q, {1, 0});
  CHECK((qback.mean() - m).cwiseAbs().maxCoeff() == 0.0);
  CHECK((qback.col_cov().entries() - mn.col_cov().entries())
            .cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("SpdMatrix validation") {
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(SpdMatrix{asym}, ValidationError);

  Matrix negdef(2, 2);
  negdef << -1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(SpdMatrix{negdef}, FactorizationError);

  // indefinite beyond the jitter ladder
  Matrix indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(SpdMatrix{indef}, FactorizationError);
}
