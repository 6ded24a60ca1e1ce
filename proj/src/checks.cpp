#include "mvgp/checks.hpp"

#include "mvgp/brownian.hpp"
#include "mvgp/matnorm.hpp"
#include "mvgp/mvgpr.hpp"
#include "mvgp/process.hpp"
#include "mvgp/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

namespace mvgp::checks {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Deterministic helpers for building random test instances.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : gen_(seed), normals_(rng::mix(seed, 1)) {}

  double uniform(double lo, double hi) {
    return lo + ((gen_() >> 11) * 0x1.0p-53) * (hi - lo);
  }
  Index uniform_index(Index lo, Index hi) {  // inclusive
    return lo + static_cast<Index>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() { return normals_.next(); }

  Matrix normal_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    normals_.fill(m);
    return m;
  }

  // Well-conditioned SPD: A A^T + I, randomly scaled.
  Matrix spd(Index dim) {
    Matrix a = normal_matrix(dim, dim);
    double scale = uniform(0.5, 2.0);
    return scale * (a * a.transpose() + Matrix::Identity(dim, dim));
  }

 private:
  std::mt19937_64 gen_;
  rng::NormalStream normals_;
};

// Tracks the worst deviation over a family of sub-checks.
struct Worst {
  double value = 0.0;
  void update(double v) { value = std::max(value, v); }
};

namespace oracle {

// Brute-force Kronecker product as an explicit loop over (i,j,a,b);
// intentionally independent of mvgp::kronecker.
Matrix kron_loop(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

// Column-stacked vec by explicit loop.
Vector vec_loop(const Matrix& m) {
  Vector v(m.size());
  Index k = 0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) v(k++) = m(i, j);
  return v;
}

// Gaussian log density evaluated through the plain covariance inverse and
// determinant (no shared code with the library's Cholesky route).
double mvn_logpdf_dense(const Vector& mean, const Matrix& cov,
                        const Vector& x) {
  const double n = static_cast<double>(x.size());
  Eigen::FullPivLU<Matrix> lu(cov);
  Vector c = x - mean;
  double quad = c.dot(lu.solve(c));
  return -0.5 * (n * std::log(2.0 * 3.14159265358979323846) +
                 std::log(lu.determinant()) + quad);
}

struct ConditionedGaussian {
  Vector mean;
  Matrix cov;
};

// Conditions N(mean, cov) on x[observed] = obs by direct block algebra.
ConditionedGaussian condition_mvn(const Vector& mean, const Matrix& cov,
                                  const std::vector<Index>& observed,
                                  const std::vector<Index>& remaining,
                                  const Vector& obs) {
  const auto no = static_cast<Index>(observed.size());
  const auto nr = static_cast<Index>(remaining.size());
  Matrix c11(no, no), c12(no, nr), c21(nr, no), c22(nr, nr);
  Vector m1(no), m2(nr);
  for (Index i = 0; i < no; ++i) {
    m1(i) = mean(observed[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < no; ++j)
      c11(i, j) = cov(observed[static_cast<std::size_t>(i)],
                      observed[static_cast<std::size_t>(j)]);
    for (Index j = 0; j < nr; ++j)
      c12(i, j) = cov(observed[static_cast<std::size_t>(i)],
                      remaining[static_cast<std::size_t>(j)]);
  }
  for (Index i = 0; i < nr; ++i) {
    m2(i) = mean(remaining[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < no; ++j)
      c21(i, j) = cov(remaining[static_cast<std::size_t>(i)],
                      observed[static_cast<std::size_t>(j)]);
    for (Index j = 0; j < nr; ++j)
      c22(i, j) = cov(remaining[static_cast<std::size_t>(i)],
                      remaining[static_cast<std::size_t>(j)]);
  }
  Matrix c11_inv = c11.inverse();
  return {m2 + c21 * c11_inv * (obs - m1), c22 - c21 * c11_inv * c12};
}

// Plain single-output GP regression mean, k' = k + delta sigma_n^2.
Vector scalar_gpr_mean(const KernelSpec& kernel, const Matrix& x,
                       const Vector& y, const Matrix& x_star) {
  const Index n = x.rows();
  const Index m = x_star.rows();
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      k(i, j) = kernel.eval(x.row(i).transpose(), x.row(j).transpose()) +
                (i == j ? kernel.noise_variance() : 0.0);
  Matrix ks(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      ks(i, j) = kernel.eval(x_star.row(i).transpose(), x.row(j).transpose());
  return ks * k.inverse() * y;
}

}  // namespace oracle

using Clock = std::chrono::steady_clock;

CheckResult timed(const std::string& name,
                  const std::function<std::pair<bool, std::string>()>& body) {
  auto t0 = Clock::now();
  bool passed = false;
  std::string detail;
  try {
    auto [ok, msg] = body();
    passed = ok;
    detail = msg;
  } catch (const std::exception& e) {
    passed = false;
    detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {name, passed, detail, secs};
}

// ---- 1. matrix-form density == vec-ed Kronecker density ---------------

std::pair<bool, std::string> check_vec_equivalence(std::uint64_t seed) {
  Worst worst;
  for (int inst = 0; inst < 100; ++inst) {
    Draw draw(rng::substream(seed, 101, static_cast<std::uint64_t>(inst)));
    Index n = draw.uniform_index(1, 5);
    Index d = draw.uniform_index(1, 5);
    Matrix m = draw.normal_matrix(n, d);
    MatrixNormal mn(m, SpdMatrix(draw.spd(n)), SpdMatrix(draw.spd(d)));
    Matrix x = m + draw.normal_matrix(n, d);

    Matrix big_cov = oracle::kron_loop(mn.col_cov().entries(),
                                       mn.row_cov().entries());
    double lhs = log_density(mn, x);
    double rhs = mvn_log_density(
        MultivariateNormalSpec{oracle::vec_loop(m), SpdMatrix(big_cov)},
        oracle::vec_loop(x));
    worst.update(std::abs(lhs - rhs));
    // second route through a dense LU, fully outside the Cholesky code
    double lu_rhs = oracle::mvn_logpdf_dense(oracle::vec_loop(m), big_cov,
                                             oracle::vec_loop(x));
    worst.update(std::abs(lhs - lu_rhs));
  }
  return {worst.value <= 1e-9,
          "max |matrix-form - vec-form| = " + fmt(worst.value) +
              " over 100 instances (tol 1e-9)"};
}

// ---- 2. block conditioning against the vec-Gaussian oracle ------------

std::pair<bool, std::string> check_conditioning_oracle(std::uint64_t seed) {
  Worst cond_worst, chain_worst;
  for (int inst = 0; inst < 50; ++inst) {
    Draw draw(rng::substream(seed, 202, static_cast<std::uint64_t>(inst)));
    Index n = draw.uniform_index(2, 5);
    Index d = draw.uniform_index(2, 5);
    Index n1 = draw.uniform_index(1, n - 1);
    Index d1 = draw.uniform_index(1, d - 1);
    Matrix m = draw.normal_matrix(n, d);
    MatrixNormal mn(m, SpdMatrix(draw.spd(n)), SpdMatrix(draw.spd(d)));
    Matrix x = m + draw.normal_matrix(n, d);

    Vector big_mean = oracle::vec_loop(m);
    Matrix big_cov = oracle::kron_loop(mn.col_cov().entries(),
                                       mn.row_cov().entries());

    // rows: observe the first n1 rows
    {
      MatrixNormal cond =
          condition(mn, {Axis::Rows, n1}, x.topRows(n1));
      std::vector<Index> obs_idx, rem_idx;
      for (Index a = 0; a < d; ++a) {
        for (Index i = 0; i < n; ++i) {
          (i < n1 ? obs_idx : rem_idx).push_back(a * n + i);
        }
      }
      Vector obs(static_cast<Index>(obs_idx.size()));
      {
        Index k = 0;
        for (Index a = 0; a < d; ++a)
          for (Index i = 0; i < n1; ++i) obs(k++) = x(i, a);
      }
      auto gauss = oracle::condition_mvn(big_mean, big_cov, obs_idx, rem_idx, obs);
      cond_worst.update(
          (gauss.mean - oracle::vec_loop(cond.mean())).cwiseAbs().maxCoeff());
      Matrix expect_cov = oracle::kron_loop(cond.col_cov().entries(),
                                            cond.row_cov().entries());
      cond_worst.update((gauss.cov - expect_cov).cwiseAbs().maxCoeff());
    }
    // cols: observe the first d1 columns (contiguous in vec order)
    {
      MatrixNormal cond =
          condition(mn, {Axis::Cols, d1}, x.leftCols(d1));
      std::vector<Index> obs_idx, rem_idx;
      for (Index a = 0; a < d; ++a) {
        for (Index i = 0; i < n; ++i) {
          (a < d1 ? obs_idx : rem_idx).push_back(a * n + i);
        }
      }
      Vector obs = oracle::vec_loop(x.leftCols(d1));
      auto gauss = oracle::condition_mvn(big_mean, big_cov, obs_idx, rem_idx, obs);
      cond_worst.update(
          (gauss.mean - oracle::vec_loop(cond.mean())).cwiseAbs().maxCoeff());
      Matrix expect_cov = oracle::kron_loop(cond.col_cov().entries(),
                                            cond.row_cov().entries());
      cond_worst.update((gauss.cov - expect_cov).cwiseAbs().maxCoeff());
    }
    // density chain rule on both axes
    {
      double joint = log_density(mn, x);
      double rows_split =
          log_density(marginal(mn, {Axis::Rows, n1}, Block::First),
                      x.topRows(n1)) +
          log_density(condition(mn, {Axis::Rows, n1}, x.topRows(n1)),
                      x.bottomRows(n - n1));
      double cols_split =
          log_density(marginal(mn, {Axis::Cols, d1}, Block::First),
                      x.leftCols(d1)) +
          log_density(condition(mn, {Axis::Cols, d1}, x.leftCols(d1)),
                      x.rightCols(d - d1));
      chain_worst.update(std::abs(joint - rows_split));
      chain_worst.update(std::abs(joint - cols_split));
    }
  }
  bool ok = cond_worst.value <= 1e-8 && chain_worst.value <= 1e-8;
  return {ok, "max conditioning dev = " + fmt(cond_worst.value) +
                  ", max chain-rule dev = " + fmt(chain_worst.value) +
                  " over 50 instances (tol 1e-8)"};
}

// ---- 3. the three process moment identities -----------------------------

InputList scalar_grid(std::initializer_list<double> ts) {
  InputList grid;
  for (double t : ts) {
    Vector v(1);
    v(0) = t;
    grid.push_back(std::move(v));
  }
  return grid;
}

std::pair<bool, std::string> check_moment_identities(std::uint64_t seed) {
  struct Config {
    MultivariateGP mgp;
    InputList grid;
  };
  Matrix lam_b(2, 2);
  lam_b << 1.0, 0.5, 0.5, 1.0;
  Matrix lam_c(2, 2);
  lam_c << 2.0, 0.4, 0.4, 3.0;
  Vector cmean(2);
  cmean << 0.5, -0.3;
  std::vector<Config> configs;
  configs.push_back({MultivariateGP(MeanFunction::constant(cmean),
                                    KernelSpec::squared_exponential(1.0, Vector::Ones(1)),
                                    SpdMatrix(Matrix::Identity(2, 2))),
                     scalar_grid({0.0, 0.6, 1.5, 2.2})});
  configs.push_back({MultivariateGP(MeanFunction::zero(2),
                                    KernelSpec::squared_exponential(0.8, Vector::Constant(1, 1.3)),
                                    SpdMatrix(lam_b)),
                     scalar_grid({-1.0, 0.2, 0.9})});
  configs.push_back({MultivariateGP(MeanFunction::zero(2), KernelSpec::min_kernel(),
                                    SpdMatrix(lam_c)),
                     scalar_grid({1.0, 2.0, 3.0})});

  Worst worst;
  std::string parts;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    PathEnsemble ens = sample_paths(configs[c].mgp, configs[c].grid, 200000,
                                    rng::substream(seed, 303, c));
    MomentReport report = check_moments(ens, configs[c].mgp);
    worst.update(report.max_dev());
    if (!parts.empty()) parts += ", ";
    parts += "cfg" + std::to_string(c + 1) + ": " + fmt(report.max_dev());
  }
  return {worst.value <= 3.0,
          "max moment deviation per config (SE units, limit 3): " + parts +
              " at 200k draws"};
}

// ---- 4. Consistency shadow: sub-grid marginal == direct finite_dim ------

std::pair<bool, std::string> check_subgrid_consistency(std::uint64_t seed) {
  Worst worst;
  for (int inst = 0; inst < 20; ++inst) {
    Draw draw(rng::substream(seed, 404, static_cast<std::uint64_t>(inst)));
    Index n = draw.uniform_index(2, 6);
    InputList grid;
    for (Index i = 0; i < n; ++i) {
      Vector t(1);
      t(0) = draw.uniform(-2.0, 2.0);
      grid.push_back(std::move(t));
    }
    Index keep = draw.uniform_index(1, n - 1);
    // random subset of size `keep`, arbitrary order, via permutation
    std::vector<Index> perm;
    for (Index i = 0; i < n; ++i) perm.push_back(i);
    for (Index i = n - 1; i > 0; --i) {
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(draw.uniform_index(0, i))]);
    }
    InputList subgrid;
    for (Index i = 0; i < keep; ++i) {
      subgrid.push_back(grid[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    }
    Matrix lam(2, 2);
    lam << 1.4, 0.3, 0.3, 0.9;
    MultivariateGP mgp(MeanFunction::zero(2),
                       KernelSpec::squared_exponential(
                           std::exp(draw.uniform(-1.0, 1.0)),
                           Vector::Constant(1, std::exp(draw.uniform(-0.5, 0.5)))),
                       SpdMatrix(lam));

    MatrixNormal direct = finite_dim(mgp, subgrid);
    MatrixNormal whole = finite_dim(mgp, grid);
    MatrixNormal margin =
        marginal(permute_rows(whole, perm), {Axis::Rows, keep}, Block::First);

    worst.update((direct.mean() - margin.mean()).cwiseAbs().maxCoeff());
    worst.update((direct.row_cov().entries() - margin.row_cov().entries())
                     .cwiseAbs().maxCoeff());
    worst.update((direct.col_cov().entries() - margin.col_cov().entries())
                     .cwiseAbs().maxCoeff());
  }
  return {worst.value == 0.0,
          "max |sub-grid marginal - direct finite_dim| = " + fmt(worst.value) +
              " over 20 grid/sub-grid pairs (must be exactly 0)"};
}

// ---- 5. strict stationarity ----------------------------------------------

std::pair<bool, std::string> check_stationarity(std::uint64_t) {
  Vector cmean(2);
  cmean << 0.3, -0.7;
  MultivariateGP se(MeanFunction::constant(cmean),
                    KernelSpec::squared_exponential(1.2, Vector::Constant(1, 0.8)),
                    SpdMatrix(Matrix::Identity(2, 2)));
  InputList grid = scalar_grid({0.1, 0.5, 1.7, 2.0});
  int passes = 0;
  for (double h : {0.7, -0.4, 3.1, 12.5, 0.05}) {
    Vector shift(1);
    shift(0) = h;
    if (is_strictly_stationary(se, grid, shift, 1e-12).stationary) ++passes;
  }

  MultivariateGP bm(MeanFunction::zero(2), KernelSpec::min_kernel(),
                    SpdMatrix(Matrix::Identity(2, 2)));
  Vector shift(1);
  shift(0) = 1.0;
  StationarityResult min_res =
      is_strictly_stationary(bm, scalar_grid({1.0, 2.0}), shift, 1e-12);
  bool witness_ok = !min_res.stationary && min_res.witness.has_value() &&
                    !min_res.witness->in_mean && min_res.witness->i == 0 &&
                    min_res.witness->j == 0 &&
                    min_res.witness->base_value == 1.0 &&
                    min_res.witness->shifted_value == 2.0;
  bool ok = passes == 5 && witness_ok;
  return {ok, "SE+constant stationary for " + std::to_string(passes) +
                  "/5 shifts at tol 1e-12; Min witness " +
                  (witness_ok ? "correct (k(1,1)=1 vs k(2,2)=2)" : "WRONG")};
}

// ---- 6. independence <-> diagonal Lambda ---------------------------------

std::pair<bool, std::string> check_independence(std::uint64_t seed) {
  Matrix lam_diag = Matrix::Zero(2, 2);
  lam_diag(0, 0) = 2.0;
  lam_diag(1, 1) = 3.0;
  MultivariateGP diag_gp(MeanFunction::zero(2),
                         KernelSpec::squared_exponential(1.0, Vector::Ones(1)),
                         SpdMatrix(lam_diag));
  PathEnsemble diag_ens = sample_paths(diag_gp, scalar_grid({0.3, 1.1, 2.4}),
                                       100000, rng::substream(seed, 606, 0));
  auto diag_cross = cross_covariance(diag_ens, 0, 1);
  double diag_dev = std::abs(diag_cross.trace) /
                    (diag_cross.trace_stderr > 0 ? diag_cross.trace_stderr : 1.0);

  bool components_ok = independent_components(diag_gp).has_value();

  Matrix lam_corr(2, 2);
  lam_corr << 1.0, 0.5, 0.5, 1.0;
  MultivariateGP corr_gp(MeanFunction::zero(2), KernelSpec::min_kernel(),
                         SpdMatrix(lam_corr));
  bool corr_none = !independent_components(corr_gp).has_value();
  PathEnsemble corr_ens = sample_paths(corr_gp, scalar_grid({1.0, 2.0, 3.0}),
                                       100000, rng::substream(seed, 606, 1));
  auto corr_cross = cross_covariance(corr_ens, 0, 1);
  // population trace = tr(C) Lambda_12 = 6 * 0.5 = 3
  double corr_dev = std::abs(corr_cross.trace - 3.0) / corr_cross.trace_stderr;

  bool ok = diag_dev <= 3.0 && corr_dev <= 3.0 && components_ok && corr_none;
  return {ok, "diagonal-Lambda cross trace = " + fmt(diag_cross.trace) + " (" +
                  fmt(diag_dev) + " SE from 0); Min-grid trace = " +
                  fmt(corr_cross.trace) + " (" + fmt(corr_dev) +
                  " SE from 3); component split " +
                  (components_ok && corr_none ? "consistent" : "WRONG")};
}

// ---- 7. Pre-Brownian motion ---------------------------------------------

std::pair<bool, std::string> check_brownian(std::uint64_t seed) {
  Worst zero_dev, second_dev, incr_dev, cross_dev, method_dev;

  // identity Lambda on a zero-anchored grid
  BrownianConfig cfg{{0.0, 1.0, 2.0, 4.0}, 2, SpdMatrix::identity(2), 100000,
                     rng::mix(seed, 707)};
  PathEnsemble joint = simulate(cfg, BrownianMethod::CholeskyJoint);
  PathEnsemble walk = simulate(cfg, BrownianMethod::IncrementalWalk);
  for (const auto* ens : {&joint, &walk}) {
    for (const Matrix& f : ens->draws) {
      zero_dev.update(f.row(0).cwiseAbs().maxCoeff());
    }
  }

  // E[B_t^T B_t] within 2% of t Lambda, both methods; also 3-combined-SE
  // agreement between the methods on first and second moments
  const Index d = 2;
  auto r_count = static_cast<double>(cfg.count);
  for (Index ti = 1; ti < 4; ++ti) {
    double t = cfg.times[static_cast<std::size_t>(ti)];
    Matrix sum_j = Matrix::Zero(d, d), sumsq_j = Matrix::Zero(d, d);
    Matrix sum_w = Matrix::Zero(d, d), sumsq_w = Matrix::Zero(d, d);
    Vector mean_j = Vector::Zero(d), mean_j_sq = Vector::Zero(d);
    Vector mean_w = Vector::Zero(d), mean_w_sq = Vector::Zero(d);
    for (const Matrix& f : joint.draws) {
      Matrix o = f.row(ti).transpose() * f.row(ti);
      sum_j += o;
      sumsq_j += o.cwiseProduct(o);
      mean_j += f.row(ti).transpose();
      mean_j_sq += f.row(ti).transpose().cwiseAbs2();
    }
    for (const Matrix& f : walk.draws) {
      Matrix o = f.row(ti).transpose() * f.row(ti);
      sum_w += o;
      sumsq_w += o.cwiseProduct(o);
      mean_w += f.row(ti).transpose();
      mean_w_sq += f.row(ti).transpose().cwiseAbs2();
    }
    Matrix emp_j = sum_j / r_count;
    Matrix emp_w = sum_w / r_count;
    Matrix target = t * Matrix::Identity(d, d);
    second_dev.update((emp_j - target).cwiseAbs().maxCoeff() / (0.02 * t));
    second_dev.update((emp_w - target).cwiseAbs().maxCoeff() / (0.02 * t));
    for (Index a = 0; a < d; ++a) {
      double se_m_j = std::sqrt((mean_j_sq(a) - mean_j(a) * mean_j(a) / r_count) /
                                (r_count - 1.0) / r_count);
      double se_m_w = std::sqrt((mean_w_sq(a) - mean_w(a) * mean_w(a) / r_count) /
                                (r_count - 1.0) / r_count);
      double diff = std::abs(mean_j(a) / r_count - mean_w(a) / r_count);
      method_dev.update(diff / std::sqrt(se_m_j * se_m_j + se_m_w * se_m_w) / 3.0);
      for (Index b = a; b < d; ++b) {
        auto se_of = [r_count](double s, double sq) {
          return std::sqrt((sq - s * s / r_count) / (r_count - 1.0) / r_count);
        };
        double se_j = se_of(sum_j(a, b), sumsq_j(a, b));
        double se_w = se_of(sum_w(a, b), sumsq_w(a, b));
        double d2 = std::abs(emp_j(a, b) - emp_w(a, b));
        method_dev.update(d2 / std::sqrt(se_j * se_j + se_w * se_w) / 3.0);
      }
    }
  }

  // increment second moments and disjoint cross moments, identity Lambda
  std::vector<std::pair<Index, Index>> intervals{{0, 1}, {1, 2}, {2, 3}, {1, 3}};
  IncrementReport rep = increment_report(joint, cfg.lambda, intervals);
  for (const IncrementEntry& e : rep.increments) {
    for (Index a = 0; a < d; ++a) {
      for (Index b = 0; b < d; ++b) {
        double se = e.stderrs(a, b);
        double diff = std::abs(e.empirical(a, b) - e.target(a, b));
        incr_dev.update(se > 0 ? diff / se : (diff > 0 ? 1e9 : 0.0));
      }
    }
    double row_diff = std::abs(e.row_form_empirical - e.row_form_target);
    incr_dev.update(e.row_form_stderr > 0 ? row_diff / e.row_form_stderr
                                          : (row_diff > 0 ? 1e9 : 0.0));
  }
  for (const CrossIncrementEntry& e : rep.cross) {
    cross_dev.update(std::abs(e.trace) / e.trace_stderr);
  }

  // correlated Lambda: E[B_t^T B_t] = t Lambda; interval (1,4) targets
  // 3 * Lambda
  Matrix lam(2, 2);
  lam << 1.0, 0.5, 0.5, 1.0;
  BrownianConfig cfg2{{1.0, 2.0, 4.0}, 2, SpdMatrix(lam), 100000,
                      rng::mix(seed, 708)};
  PathEnsemble corr = simulate(cfg2, BrownianMethod::CholeskyJoint);
  for (Index ti = 0; ti < 3; ++ti) {
    double t = cfg2.times[static_cast<std::size_t>(ti)];
    Matrix sum = Matrix::Zero(d, d);
    for (const Matrix& f : corr.draws) {
      sum += f.row(ti).transpose() * f.row(ti);
    }
    double scale = 0.02 * t * lam.cwiseAbs().maxCoeff();
    second_dev.update((sum / r_count - t * lam).cwiseAbs().maxCoeff() / scale);
  }
  IncrementReport rep2 = increment_report(corr, cfg2.lambda, {{0, 2}, {0, 1}, {1, 2}});
  for (const IncrementEntry& e : rep2.increments) {
    for (Index a = 0; a < d; ++a) {
      for (Index b = 0; b < d; ++b) {
        incr_dev.update(std::abs(e.empirical(a, b) - e.target(a, b)) /
                        e.stderrs(a, b));
      }
    }
  }
  for (const CrossIncrementEntry& e : rep2.cross) {
    cross_dev.update(std::abs(e.trace) / e.trace_stderr);
  }

  bool ok = zero_dev.value == 0.0 && second_dev.value <= 1.0 &&
            incr_dev.value <= 3.0 && cross_dev.value <= 3.0 &&
            method_dev.value <= 1.0;
  return {ok, "B_0 max |entry| = " + fmt(zero_dev.value) +
                  " (exact 0); E[B^T B] within " + fmt(second_dev.value * 2) +
                  "% of t*Lambda (limit 2%); increment dev " +
                  fmt(incr_dev.value) + " SE (limit 3); cross dev " +
                  fmt(cross_dev.value) + " SE (limit 3); method agreement " +
                  fmt(method_dev.value * 3) + " combined SE (limit 3)"};
}

// ---- 8. MV-GPR predictive distribution -----------------------------------

std::pair<bool, std::string> check_mvgpr_predictive(std::uint64_t seed) {
  Draw draw(rng::mix(seed, 808));
  Worst interp_dev, cond_dev, scalar_dev, kron_dev;
  bool lambda_bitwise = true;

  // (a) noise-free interpolation, single point and n=3
  {
    TrainingSet one{Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, -1.3)};
    MvgprModel model(KernelSpec::squared_exponential(1.0, Vector::Ones(1), 0.0),
                     Matrix::Identity(1, 1), one);
    PredictiveDistribution p = predict(model, one.x);
    interp_dev.update(std::abs(p.mean(0, 0) - one.y(0, 0)));
    interp_dev.update(std::abs(p.sigma.entries()(0, 0)));
  }
  {
    Matrix x(3, 1);
    x << 0.2, 1.0, 2.5;
    Matrix y = draw.normal_matrix(3, 2);
    Matrix phi(2, 2);
    phi << 1.0, 0.0, 0.3, 0.9;
    MvgprModel model(KernelSpec::squared_exponential(1.0, Vector::Ones(1), 0.0),
                     phi, TrainingSet{x, y});
    PredictiveDistribution p = predict(model, x);
    interp_dev.update((p.mean - y).cwiseAbs().maxCoeff());
    interp_dev.update(p.sigma.entries().diagonal().cwiseAbs().maxCoeff());
  }

  // (b) predict == matnorm.condition on the joint over (train, test) rows
  {
    Index n = 5, m = 3, p_dim = 2, d = 2;
    Matrix x = draw.normal_matrix(n, p_dim);
    Matrix y = draw.normal_matrix(n, d);
    Matrix xs = draw.normal_matrix(m, p_dim);
    Matrix phi(2, 2);
    phi << 1.0, 0.0, -0.4, 1.2;
    KernelSpec kernel =
        KernelSpec::squared_exponential(1.3, Vector::Constant(2, 0.9), 0.05);
    MvgprModel model(kernel, phi, TrainingSet{x, y});
    PredictiveDistribution pred = predict(model, xs);

    InputList train_pts, test_pts;
    for (Index i = 0; i < n; ++i) train_pts.push_back(x.row(i).transpose());
    for (Index i = 0; i < m; ++i) test_pts.push_back(xs.row(i).transpose());
    Matrix joint_cov(n + m, n + m);
    joint_cov.topLeftCorner(n, n) = noisy_gram(kernel, train_pts).entries;
    joint_cov.bottomRightCorner(m, m) = noisy_gram(kernel, test_pts).entries;
    Matrix cross = gram(kernel, test_pts, train_pts).entries;  // m x n
    joint_cov.bottomLeftCorner(m, n) = cross;
    joint_cov.topRightCorner(n, m) = cross.transpose();
    MatrixNormal joint(Matrix::Zero(n + m, d), SpdMatrix(joint_cov),
                       model.lambda());
    MatrixNormal cond = condition(joint, {Axis::Rows, n}, y);
    cond_dev.update((cond.mean() - pred.mean).cwiseAbs().maxCoeff());
    cond_dev.update((cond.row_cov().entries() - pred.sigma.entries())
                        .cwiseAbs().maxCoeff());
    lambda_bitwise = lambda_bitwise &&
        (cond.col_cov().entries().array() == model.lambda().entries().array()).all();

    // (d) Lambda_hat == Lambda bitwise
    lambda_bitwise = lambda_bitwise &&
        (pred.lambda.entries().array() == model.lambda().entries().array()).all();

    // (e) vec covariance equals the brute-force Kronecker entrywise
    Matrix vc = predictive_vec_cov(pred).entries();
    Matrix vc_oracle = oracle::kron_loop(pred.sigma.entries(),
                                         pred.lambda.entries());
    kron_dev.update((vc - vc_oracle).cwiseAbs().maxCoeff());
  }

  // (c) diagonal Lambda: columns match independent scalar GPR means
  {
    Index n = 6, m = 4;
    Matrix x = draw.normal_matrix(n, 1);
    Matrix y = draw.normal_matrix(n, 2);
    Matrix xs = draw.normal_matrix(m, 1);
    Matrix phi = Matrix::Zero(2, 2);
    phi(0, 0) = 1.0;
    phi(1, 1) = 1.7;
    KernelSpec kernel =
        KernelSpec::squared_exponential(0.9, Vector::Constant(1, 1.1), 0.1);
    MvgprModel model(kernel, phi, TrainingSet{x, y});
    PredictiveDistribution pred = predict(model, xs);
    for (Index j = 0; j < 2; ++j) {
      Vector mean_j = oracle::scalar_gpr_mean(kernel, x, y.col(j), xs);
      scalar_dev.update((pred.mean.col(j) - mean_j).cwiseAbs().maxCoeff());
    }
  }

  bool ok = interp_dev.value <= 1e-10 && cond_dev.value <= 1e-8 &&
            scalar_dev.value <= 1e-8 && lambda_bitwise &&
            kron_dev.value == 0.0;
  return {ok, "interpolation dev " + fmt(interp_dev.value) +
                  " (tol 1e-10); predict-vs-condition dev " +
                  fmt(cond_dev.value) + " (tol 1e-8); scalar-GPR dev " +
                  fmt(scalar_dev.value) + " (tol 1e-8); Lambda_hat bitwise " +
                  (lambda_bitwise ? "yes" : "NO") + "; vec-cov dev " +
                  fmt(kron_dev.value) + " (exact)"};
}

// ---- 9. Likelihood machinery ---------------------------------------------

std::pair<bool, std::string> check_likelihood(std::uint64_t seed) {
  Worst nll_dev, grad_dev, gauge_dev;
  for (int inst = 0; inst < 20; ++inst) {
    Draw draw(rng::substream(seed, 909, static_cast<std::uint64_t>(inst)));
    Index n = draw.uniform_index(2, 6);
    Index d = draw.uniform_index(1, 3);
    Index p = draw.uniform_index(1, 2);
    TrainingSet data{draw.normal_matrix(n, p), draw.normal_matrix(n, d)};
    KernelSpec kernel = KernelSpec::squared_exponential(
        std::exp(draw.uniform(-1.0, 1.0)),
        Vector::Constant(p, std::exp(draw.uniform(-0.7, 0.7))),
        draw.uniform(0.05, 0.5));
    Matrix phi = Matrix::Zero(d, d);
    phi(0, 0) = 1.0;
    for (Index i = 1; i < d; ++i) {
      phi(i, i) = draw.uniform(0.7, 1.4);
      for (Index j = 0; j < i; ++j) phi(i, j) = draw.uniform(-0.8, 0.8);
    }
    MvgprModel model(kernel, phi, data);

    // vec-Gaussian oracle
    Matrix kprime = model.kxx();
    Matrix big = oracle::kron_loop(model.lambda().entries(), kprime);
    double vec_nll = -mvn_log_density(
        MultivariateNormalSpec{Vector::Zero(n * d), SpdMatrix(big)},
        oracle::vec_loop(data.y));
    nll_dev.update(std::abs(nll(model, model.training()) - vec_nll));

    // central finite differences in the transformed coordinates
    Vector params = model.parameters();
    Vector analytic = nll_grad(model, model.training());
    const double h = 1e-6;
    for (Index c = 0; c < params.size(); ++c) {
      Vector up = params, dn = params;
      up(c) += h;
      dn(c) -= h;
      double fu = nll(MvgprModel::from_parameters(kernel, up, data), data);
      double fd = nll(MvgprModel::from_parameters(kernel, dn, data), data);
      double num = (fu - fd) / (2.0 * h);
      double rel = std::abs(analytic(c) - num) /
                   std::max({std::abs(analytic(c)), std::abs(num), 1.0});
      grad_dev.update(rel);
    }

    // (c K', Lambda / c) gauge
    const double c = 3.7;
    double base = nll_from_parts(kprime, model.lambda().entries(), data.y);
    double scaled = nll_from_parts(c * kprime,
                                   model.lambda().entries() / c, data.y);
    gauge_dev.update(std::abs(base - scaled));
  }
  bool ok = nll_dev.value <= 1e-9 && grad_dev.value <= 1e-5 &&
            gauge_dev.value <= 1e-9;
  return {ok, "nll-vs-vec dev " + fmt(nll_dev.value) +
                  " (tol 1e-9); max grad rel dev " + fmt(grad_dev.value) +
                  " (tol 1e-5); gauge dev " + fmt(gauge_dev.value) +
                  " (tol 1e-9) over 20 instances"};
}

// ---- 10. Synthetic recovery ----------------------------------------------

std::pair<bool, std::string> check_synthetic_recovery(std::uint64_t seed) {
  Draw draw(rng::mix(seed, 1010));
  const Index n = 200;
  Matrix x(n, 1);
  for (Index i = 0; i < n; ++i) x(i, 0) = draw.uniform(-3.0, 3.0);
  KernelSpec true_kernel =
      KernelSpec::squared_exponential(1.0, Vector::Ones(1), 0.01);
  Matrix lam(2, 2);
  lam << 1.0, 0.8, 0.8, 1.0;
  InputList pts;
  for (Index i = 0; i < n; ++i) pts.push_back(x.row(i).transpose());
  MatrixNormal law(Matrix::Zero(n, 2),
                   SpdMatrix(noisy_gram(true_kernel, pts).entries),
                   SpdMatrix(lam));
  Matrix y = sample(law, 1, rng::mix(seed, 1011)).front();
  TrainingSet data{x, y};

  KernelSpec init =
      KernelSpec::squared_exponential(0.5, Vector::Constant(1, 2.0), 0.1);
  FitConfig config;
  config.max_iterations = 200;
  config.tolerance = 1e-5;
  config.restarts = 5;
  config.seed = rng::mix(seed, 1012);
  auto [model, report] = fit(data, init, config);

  const Matrix& fitted_lam = model.lambda().entries();
  double corr = fitted_lam(0, 1) /
                std::sqrt(fitted_lam(0, 0) * fitted_lam(1, 1));
  double log_ls = std::log(model.kernel().length_scales()(0));
  bool ok = std::abs(corr - 0.8) <= 0.1 && std::abs(log_ls) <= 0.3;
  return {ok, "fitted correlation " + fmt(corr) +
                  " (target 0.8 +- 0.1); fitted log length-scale " +
                  fmt(log_ls) + " (target 0 +- 0.3); final nll " +
                  fmt(report.final_nll) + " after " +
                  std::to_string(report.iterations) + " iterations"};
}

}  // namespace

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
  std::vector<CheckResult> results;
  results.push_back(timed("matnorm_vec_equivalence",
                          [&] { return check_vec_equivalence(seed); }));
  results.push_back(timed("matnorm_conditioning_oracle",
                          [&] { return check_conditioning_oracle(seed); }));
  results.push_back(timed("process_moment_identities",
                          [&] { return check_moment_identities(seed); }));
  results.push_back(timed("finite_dim_subgrid_consistency",
                          [&] { return check_subgrid_consistency(seed); }));
  results.push_back(timed("strict_stationarity",
                          [&] { return check_stationarity(seed); }));
  results.push_back(timed("component_independence",
                          [&] { return check_independence(seed); }));
  results.push_back(timed("pre_brownian_motion",
                          [&] { return check_brownian(seed); }));
  results.push_back(timed("mvgpr_prediction",
                          [&] { return check_mvgpr_predictive(seed); }));
  results.push_back(timed("mvgpr_likelihood_machinery",
                          [&] { return check_likelihood(seed); }));
  results.push_back(timed("mvgpr_synthetic_recovery",
                          [&] { return check_synthetic_recovery(seed); }));
  return results;
}

std::string render_report(const std::vector<CheckResult>& results,
                          bool with_timing) {
  std::ostringstream os;
  for (const CheckResult& r : results) {
    os << (r.passed ? "PASS" : "FAIL") << "  " << r.name;
    if (with_timing) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " [%.2fs]", r.seconds);
      os << buf;
    }
    os << "\n      " << r.detail << "\n";
  }
  return os.str();
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

}  // namespace mvgp::checks
