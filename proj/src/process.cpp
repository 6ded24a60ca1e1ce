#include "mvgp/process.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace mvgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// |emp - target| in standard-error units; exact agreement counts as 0
// even when the SE is degenerate.
double se_deviation(double emp, double target, double se) {
  double diff = std::abs(emp - target);
  if (se == 0.0) return diff == 0.0 ? 0.0 : kInf;
  return diff / se;
}

bool same_point(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

MeanFunction MeanFunction::zero(Index output_dim) {
  require(output_dim >= 1, "MeanFunction: output_dim must be >= 1");
  return MeanFunction(Form::Zero, output_dim);
}

MeanFunction MeanFunction::constant(Vector value) {
  require(value.size() >= 1, "MeanFunction: constant must be nonempty");
  MeanFunction m(Form::Constant, value.size());
  m.constant_ = std::move(value);
  return m;
}

MeanFunction MeanFunction::tabulated(
    std::vector<std::pair<Vector, Vector>> table) {
  require(!table.empty(), "MeanFunction: table must be nonempty");
  Index d = table.front().second.size();
  require(d >= 1, "MeanFunction: table values must be nonempty");
  for (const auto& [t, v] : table) {
    require(v.size() == d, "MeanFunction: table values must share one dim");
  }
  MeanFunction m(Form::Tabulated, d);
  m.table_ = std::move(table);
  return m;
}

const Vector& MeanFunction::constant_value() const {
  require(form_ == Form::Constant, "MeanFunction: not a Constant mean");
  return constant_;
}

Vector MeanFunction::operator()(const Vector& t) const {
  switch (form_) {
    case Form::Zero:
      return Vector::Zero(output_dim_);
    case Form::Constant:
      return constant_;
    case Form::Tabulated:
      for (const auto& [point, value] : table_) {
        if (same_point(point, t)) return value;
      }
      throw ValidationError(
          "Tabulated mean is defined only at its exact grid points");
  }
  throw ValidationError("unknown mean form");
}

MultivariateGP::MultivariateGP(MeanFunction mean, KernelSpec kernel,
                               SpdMatrix lambda)
    : mean_(std::move(mean)),
      kernel_(std::move(kernel)),
      lambda_(std::move(lambda)) {
  require(mean_.output_dim() == lambda_.dim(),
          "MultivariateGP: mean output_dim must equal lambda dim");
}

MatrixNormal finite_dim(const MultivariateGP& mgp, const InputList& grid) {
  require(!grid.empty(), "finite_dim: grid must be nonempty");
  const Index n = static_cast<Index>(grid.size());
  const Index d = mgp.output_dim();
  Matrix mean(n, d);
  for (Index i = 0; i < n; ++i) {
    mean.row(i) = mgp.mean()(grid[static_cast<std::size_t>(i)]).transpose();
  }
  GramMatrix k = gram(mgp.kernel(), grid);
  return MatrixNormal(std::move(mean), SpdMatrix(std::move(k.entries)),
                      mgp.lambda());
}

PathEnsemble sample_paths(const MultivariateGP& mgp, const InputList& grid,
                          int count, std::uint64_t seed) {
  require(count >= 1, "sample_paths: count must be >= 1");
  MatrixNormal law = finite_dim(mgp, grid);
  return PathEnsemble{grid, sample(law, count, seed), seed};
}

double MomentReport::max_dev() const {
  return std::max(max_mean_dev, std::max(max_cross_dev, max_col_dev));
}

MomentReport check_moments(const PathEnsemble& ensemble,
                           const MultivariateGP& mgp) {
  require(!ensemble.draws.empty(), "check_moments: ensemble is empty");
  const Index n = static_cast<Index>(ensemble.grid.size());
  const Index d = mgp.output_dim();
  const auto r_count = static_cast<double>(ensemble.draws.size());
  for (const Matrix& f : ensemble.draws) {
    require(f.rows() == n && f.cols() == d,
            "check_moments: draw dimensions do not match the process");
  }

  MatrixNormal law = finite_dim(mgp, ensemble.grid);
  const Matrix& m = law.mean();
  const Matrix& k = law.row_cov().entries();
  const Matrix& lambda = mgp.lambda().entries();
  const double tr_lambda = lambda.trace();
  const double tr_k = k.trace();

  // (a) entrywise mean
  Matrix sum = Matrix::Zero(n, d);
  Matrix sumsq = Matrix::Zero(n, d);
  // (b) scalar cross-moments per (s,l) pair, rows treated as 1 x d
  Matrix cross_sum = Matrix::Zero(n, n);
  Matrix cross_sumsq = Matrix::Zero(n, n);
  // (c) column moment (F-M)^T (F-M)
  Matrix col_sum = Matrix::Zero(d, d);
  Matrix col_sumsq = Matrix::Zero(d, d);

  for (const Matrix& f : ensemble.draws) {
    sum += f;
    sumsq += f.cwiseProduct(f);
    Matrix centered = f - m;
    Matrix pair = centered * centered.transpose();  // (s,l) -> row_s . row_l
    cross_sum += pair;
    cross_sumsq += pair.cwiseProduct(pair);
    Matrix col = centered.transpose() * centered;
    col_sum += col;
    col_sumsq += col.cwiseProduct(col);
  }

  auto stderr_of = [r_count](double s, double sq) {
    double var = (sq - s * s / r_count) / (r_count - 1.0);
    return var > 0.0 ? std::sqrt(var / r_count) : 0.0;
  };

  MomentReport report{0.0, 0.0, 0.0};
  for (Index i = 0; i < n; ++i) {
    for (Index a = 0; a < d; ++a) {
      double dev = se_deviation(sum(i, a) / r_count, m(i, a),
                                stderr_of(sum(i, a), sumsq(i, a)));
      report.max_mean_dev = std::max(report.max_mean_dev, dev);
    }
  }
  for (Index s = 0; s < n; ++s) {
    for (Index l = s; l < n; ++l) {
      double dev = se_deviation(cross_sum(s, l) / r_count,
                                tr_lambda * k(s, l),
                                stderr_of(cross_sum(s, l), cross_sumsq(s, l)));
      report.max_cross_dev = std::max(report.max_cross_dev, dev);
    }
  }
  for (Index a = 0; a < d; ++a) {
    for (Index b = a; b < d; ++b) {
      double dev = se_deviation(col_sum(a, b) / r_count, tr_k * lambda(a, b),
                                stderr_of(col_sum(a, b), col_sumsq(a, b)));
      report.max_col_dev = std::max(report.max_col_dev, dev);
    }
  }
  return report;
}

std::string StationarityWitness::describe() const {
  std::ostringstream os;
  os << (in_mean ? "mean entry (" : "row covariance entry (") << i << "," << j
     << "): " << base_value << " vs shifted " << shifted_value;
  return os.str();
}

StationarityResult is_strictly_stationary(const MultivariateGP& mgp,
                                          const InputList& grid,
                                          const Vector& shift, double tol) {
  InputList shifted;
  shifted.reserve(grid.size());
  for (const Vector& t : grid) {
    require(t.size() == shift.size(),
            "is_strictly_stationary: shift dimension mismatch");
    shifted.push_back(t + shift);
  }
  MatrixNormal base = finite_dim(mgp, grid);
  MatrixNormal moved = finite_dim(mgp, shifted);
  for (Index i = 0; i < base.rows(); ++i) {
    for (Index j = 0; j < base.cols(); ++j) {
      if (std::abs(base.mean()(i, j) - moved.mean()(i, j)) > tol) {
        return {false, StationarityWitness{true, i, j, base.mean()(i, j),
                                           moved.mean()(i, j)}};
      }
    }
  }
  const Matrix& k0 = base.row_cov().entries();
  const Matrix& k1 = moved.row_cov().entries();
  for (Index i = 0; i < k0.rows(); ++i) {
    for (Index j = 0; j < k0.cols(); ++j) {
      if (std::abs(k0(i, j) - k1(i, j)) > tol) {
        return {false, StationarityWitness{false, i, j, k0(i, j), k1(i, j)}};
      }
    }
  }
  return {true, std::nullopt};
}

std::optional<std::vector<MultivariateGP>> independent_components(
    const MultivariateGP& mgp) {
  const Matrix& lambda = mgp.lambda().entries();
  const Index d = lambda.rows();
  double max_diag = lambda.diagonal().cwiseAbs().maxCoeff();
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      if (i != j && std::abs(lambda(i, j)) > 1e-12 * max_diag) {
        return std::nullopt;
      }
    }
  }
  std::vector<MultivariateGP> components;
  components.reserve(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) {
    MeanFunction mean_i = MeanFunction::zero(1);
    switch (mgp.mean().form()) {
      case MeanFunction::Form::Zero:
        break;
      case MeanFunction::Form::Constant: {
        Vector c(1);
        c(0) = mgp.mean().constant_value()(i);
        mean_i = MeanFunction::constant(std::move(c));
        break;
      }
      case MeanFunction::Form::Tabulated: {
        std::vector<std::pair<Vector, Vector>> table;
        table.reserve(mgp.mean().table().size());
        for (const auto& [t, v] : mgp.mean().table()) {
          Vector vi(1);
          vi(0) = v(i);
          table.emplace_back(t, std::move(vi));
        }
        mean_i = MeanFunction::tabulated(std::move(table));
        break;
      }
    }
    Matrix lam_i(1, 1);
    lam_i(0, 0) = lambda(i, i);
    components.emplace_back(std::move(mean_i), mgp.kernel(),
                            SpdMatrix(std::move(lam_i)));
  }
  return components;
}

CrossCovarianceEstimate cross_covariance(const PathEnsemble& ensemble,
                                         Index i, Index j) {
  require(!ensemble.draws.empty(), "cross_covariance: ensemble is empty");
  const Index d = ensemble.draws.front().cols();
  const Index n = ensemble.draws.front().rows();
  require(i >= 0 && i < d && j >= 0 && j < d,
          "cross_covariance: component out of range");
  require(i != j, "cross_covariance: components must differ");
  const auto r_count = static_cast<double>(ensemble.draws.size());

  Vector mean_i = Vector::Zero(n);
  Vector mean_j = Vector::Zero(n);
  for (const Matrix& f : ensemble.draws) {
    mean_i += f.col(i);
    mean_j += f.col(j);
  }
  mean_i /= r_count;
  mean_j /= r_count;

  Matrix cov = Matrix::Zero(n, n);
  double trace_sum = 0.0;
  double trace_sumsq = 0.0;
  for (const Matrix& f : ensemble.draws) {
    Vector ci = f.col(i) - mean_i;
    Vector cj = f.col(j) - mean_j;
    cov += ci * cj.transpose();
    double z = ci.dot(cj);
    trace_sum += z;
    trace_sumsq += z * z;
  }
  double denom = std::max(r_count - 1.0, 1.0);
  cov /= denom;
  double trace = trace_sum / denom;
  double trace_stderr = kInf;
  if (ensemble.draws.size() >= 2) {
    double var = (trace_sumsq - trace_sum * trace_sum / r_count) /
                 (r_count - 1.0);
    trace_stderr = var > 0.0 ? std::sqrt(var / r_count) : 0.0;
  }
  return {std::move(cov), trace, trace_stderr};
}

}  // namespace mvgp
