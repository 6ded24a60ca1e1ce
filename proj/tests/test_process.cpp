#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mvgp/process.hpp"
#include "mvgp/rng.hpp"

#include <cmath>

using namespace mvgp;

namespace {

Vector pt(double x) {
  Vector v(1);
  v(0) = x;
  return v;
}

InputList grid(std::initializer_list<double> ts) {
  InputList g;
  for (double t : ts) g.push_back(pt(t));
  return g;
}

MultivariateGP se_process(Index d, double sf2 = 1.0, double ls = 1.0) {
  return MultivariateGP(MeanFunction::zero(d),
                        KernelSpec::squared_exponential(sf2, Vector::Constant(1, ls)),
                        SpdMatrix::identity(d));
}

}  // namespace

TEST_CASE("finite_dim: single point, zero mean, Min C-matrix") {
  Vector c(2);
  c << 0.4, -1.1;
  MultivariateGP mgp(MeanFunction::constant(c),
                     KernelSpec::squared_exponential(2.0, Vector::Ones(1)),
                     SpdMatrix::identity(2));
  MatrixNormal one = finite_dim(mgp, grid({0.7}));
  CHECK(one.rows() == 1);
  CHECK(one.mean()(0, 0) == 0.4);
  CHECK(one.mean()(0, 1) == -1.1);
  CHECK(one.row_cov().entries()(0, 0) == doctest::Approx(2.0));

  MatrixNormal zm = finite_dim(se_process(3), grid({0.0, 1.0}));
  CHECK(zm.mean().cwiseAbs().maxCoeff() == 0.0);

  Matrix expected(3, 3);
  expected << 1, 1, 1, 1, 2, 2, 1, 2, 3;
  MultivariateGP bm(MeanFunction::zero(2), KernelSpec::min_kernel(),
                    SpdMatrix::identity(2));
  CHECK((finite_dim(bm, grid({1.0, 2.0, 3.0})).row_cov().entries() - expected)
            .cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_paths: determinism and the Monte Carlo mean") {
  MultivariateGP mgp = se_process(2);
  InputList g = grid({0.0, 0.8, 1.9});
  PathEnsemble a = sample_paths(mgp, g, 1, 31);
  PathEnsemble b = sample_paths(mgp, g, 1, 31);
  CHECK((a.draws[0].array() == b.draws[0].array()).all());

  const int count = 100000;
  PathEnsemble ens = sample_paths(mgp, g, count, 7);
  Matrix mean = Matrix::Zero(3, 2);
  for (const Matrix& f : ens.draws) mean += f;
  mean /= count;
  // per-entry variance is k(t,t) = 1, so 3 SE = 3/sqrt(count)
  CHECK(mean.cwiseAbs().maxCoeff() <= 3.0 / std::sqrt(double(count)));
}

TEST_CASE("check_moments: targets and Monte Carlo agreement") {
  // tr(K) of the Min C-matrix on [1,2,3] is 6, so identity (c) targets 6I
  MultivariateGP bm(MeanFunction::zero(2), KernelSpec::min_kernel(),
                    SpdMatrix::identity(2));
  MatrixNormal law = finite_dim(bm, grid({1.0, 2.0, 3.0}));
  CHECK(law.row_cov().entries().trace() == 6.0);

  PathEnsemble ens = sample_paths(bm, grid({1.0, 2.0, 3.0}), 50000, 11);
  MomentReport rep = check_moments(ens, bm);
  CHECK(rep.max_dev() <= 3.0);

  Matrix lam(2, 2);
  lam << 1.0, 0.5, 0.5, 1.0;
  MultivariateGP corr(MeanFunction::zero(2),
                      KernelSpec::squared_exponential(1.0, Vector::Ones(1)),
                      SpdMatrix(lam));
  PathEnsemble ens2 = sample_paths(corr, grid({0.1, 0.9, 2.0}), 50000, 13);
  CHECK(check_moments(ens2, corr).max_dev() <= 3.0);

  // ensemble/process dimension mismatch
  MultivariateGP wide(MeanFunction::zero(3), KernelSpec::min_kernel(),
                      SpdMatrix::identity(3));
  CHECK_THROWS_AS(check_moments(ens, wide), ValidationError);
}

TEST_CASE("is_strictly_stationary: SE passes, Min fails with witness") {
  Vector c(2);
  c << 0.3, -0.7;
  MultivariateGP se(MeanFunction::constant(c),
                    KernelSpec::squared_exponential(1.0, Vector::Ones(1)),
                    SpdMatrix::identity(2));
  InputList g = grid({0.1, 0.5, 1.7});

  CHECK(is_strictly_stationary(se, g, pt(0.0), 1e-12).stationary);
  CHECK(is_strictly_stationary(se, g, pt(0.7), 1e-12).stationary);

  MultivariateGP bm(MeanFunction::zero(2), KernelSpec::min_kernel(),
                    SpdMatrix::identity(2));
  StationarityResult res =
      is_strictly_stationary(bm, grid({1.0, 2.0}), pt(1.0), 1e-12);
  REQUIRE_FALSE(res.stationary);
  REQUIRE(res.witness.has_value());
  CHECK_FALSE(res.witness->in_mean);
  CHECK(res.witness->i == 0);
  CHECK(res.witness->j == 0);
  CHECK(res.witness->base_value == 1.0);
  CHECK(res.witness->shifted_value == 2.0);
}

TEST_CASE("independent_components: diagonal test and reassembly") {
  // identity Lambda: d copies of the same scalar process
  MultivariateGP iso = se_process(3);
  auto comps = independent_components(iso);
  REQUIRE(comps.has_value());
  CHECK(comps->size() == 3);
  for (const MultivariateGP& c : *comps) {
    CHECK(c.output_dim() == 1);
    CHECK(c.lambda().entries()(0, 0) == 1.0);
  }

  Matrix lam(2, 2);
  lam << 1.0, 0.5, 0.5, 1.0;
  MultivariateGP corr(MeanFunction::zero(2), KernelSpec::min_kernel(),
                      SpdMatrix(lam));
  CHECK_FALSE(independent_components(corr).has_value());

  // diag(2,3): kernels scale through the lambda factor; reassembling the
  // component lambdas reproduces the original finite-dimensional law
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 2.0;
  diag(1, 1) = 3.0;
  Vector cmean(2);
  cmean << 0.5, -1.0;
  MultivariateGP two(MeanFunction::constant(cmean), KernelSpec::min_kernel(),
                     SpdMatrix(diag));
  auto split = independent_components(two);
  REQUIRE(split.has_value());
  CHECK((*split)[0].lambda().entries()(0, 0) == 2.0);
  CHECK((*split)[1].lambda().entries()(0, 0) == 3.0);
  CHECK((*split)[0].mean()(pt(1.0))(0) == 0.5);
  CHECK((*split)[1].mean()(pt(1.0))(0) == -1.0);

  Matrix relam = Matrix::Zero(2, 2);
  relam(0, 0) = (*split)[0].lambda().entries()(0, 0);
  relam(1, 1) = (*split)[1].lambda().entries()(0, 0);
  MultivariateGP rebuilt(MeanFunction::constant(cmean), KernelSpec::min_kernel(),
                         SpdMatrix(relam));
  MatrixNormal l1 = finite_dim(two, grid({1.0, 2.0}));
  MatrixNormal l2 = finite_dim(rebuilt, grid({1.0, 2.0}));
  CHECK((l1.mean() - l2.mean()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((l1.row_cov().entries() - l2.row_cov().entries()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((l1.col_cov().entries() - l2.col_cov().entries()).cwiseAbs().maxCoeff() == 0.0);

  // component cross-covariance consistent with independence
  PathEnsemble ens = sample_paths(two, grid({1.0, 2.0, 3.0}), 50000, 17);
  auto cross = cross_covariance(ens, 0, 1);
  CHECK(std::abs(cross.trace) <= 3.0 * cross.trace_stderr);
}

TEST_CASE("cross_covariance: targets, degenerate draw count, errors") {
  Matrix lam(2, 2);
  lam << 1.0, 0.5, 0.5, 1.0;
  MultivariateGP corr(MeanFunction::zero(2), KernelSpec::min_kernel(),
                      SpdMatrix(lam));
  PathEnsemble ens = sample_paths(corr, grid({1.0, 2.0, 3.0}), 50000, 19);
  auto cross = cross_covariance(ens, 0, 1);
  // population trace = tr(C) Lambda_12 = 6 * 0.5
  CHECK(std::abs(cross.trace - 3.0) <= 3.0 * cross.trace_stderr);
  // entrywise population value is Lambda_12 * K
  MatrixNormal law = finite_dim(corr, ens.grid);
  Matrix target = 0.5 * law.row_cov().entries();
  double se_scale = 3.0 * 6.0 / std::sqrt(50000.0);  // crude entry bound
  CHECK((cross.cov - target).cwiseAbs().maxCoeff() <= se_scale);

  PathEnsemble single{ens.grid, {ens.draws[0]}, 0};
  auto degenerate = cross_covariance(single, 0, 1);
  CHECK(std::isinf(degenerate.trace_stderr));

  CHECK_THROWS_AS(cross_covariance(ens, 0, 5), ValidationError);
  CHECK_THROWS_AS(cross_covariance(ens, 1, 1), ValidationError);
}

TEST_CASE("consistency: sub-grid marginal equals direct finite_dim") {
  MultivariateGP mgp = se_process(2, 1.4, 0.9);
  InputList g = grid({-1.0, 0.2, 0.8, 2.5});
  MatrixNormal whole = finite_dim(mgp, g);
  MatrixNormal lead = marginal(whole, {Axis::Rows, 2}, Block::First);
  MatrixNormal direct = finite_dim(mgp, grid({-1.0, 0.2}));
  CHECK((lead.mean() - direct.mean()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lead.row_cov().entries() - direct.row_cov().entries())
            .cwiseAbs().maxCoeff() == 0.0);
  CHECK((lead.col_cov().entries() - direct.col_cov().entries())
            .cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tabulated mean: exact grid points only") {
  Vector v1(2), v2(2);
  v1 << 1.0, 2.0;
  v2 << -1.0, 0.5;
  MeanFunction tab = MeanFunction::tabulated({{pt(0.0), v1}, {pt(1.5), v2}});
  CHECK(tab(pt(1.5))(1) == 0.5);
  CHECK_THROWS_AS(tab(pt(0.75)), ValidationError);

  MultivariateGP mgp(tab, KernelSpec::squared_exponential(1.0, Vector::Ones(1)),
                     SpdMatrix::identity(2));
  MatrixNormal law = finite_dim(mgp, grid({0.0, 1.5}));
  CHECK(law.mean()(1, 0) == -1.0);
  CHECK_THROWS_AS(finite_dim(mgp, grid({0.0, 0.7})), ValidationError);
}

TEST_CASE("MultivariateGP validates dimensions") {
  CHECK_THROWS_AS(MultivariateGP(MeanFunction::zero(2), KernelSpec::min_kernel(),
                                 SpdMatrix::identity(3)),
                  ValidationError);
  CHECK_THROWS_AS(finite_dim(se_process(2), InputList{}), ValidationError);
}
