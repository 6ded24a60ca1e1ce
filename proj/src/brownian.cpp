#include "mvgp/brownian.hpp"

#include "mvgp/rng.hpp"

#include <cmath>
#include <limits>

namespace mvgp {

namespace {

constexpr std::uint64_t kWalkStream = 0x62726f776e77ULL;  // "brownw"

InputList to_grid(const std::vector<double>& times) {
  InputList grid;
  grid.reserve(times.size());
  for (double t : times) {
    Vector v(1);
    v(0) = t;
    grid.push_back(std::move(v));
  }
  return grid;
}

double sample_stderr(double sum, double sumsq, double r_count) {
  double var = (sumsq - sum * sum / r_count) / (r_count - 1.0);
  return var > 0.0 ? std::sqrt(var / r_count) : 0.0;
}

}  // namespace

void BrownianConfig::validate() const {
  require(!times.empty(), "BrownianConfig: times must be nonempty");
  require(times.front() >= 0.0, "BrownianConfig: times must be >= 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    require(times[i] > times[i - 1],
            "BrownianConfig: times must be strictly increasing");
  }
  require(d >= 1 && lambda.dim() == d,
          "BrownianConfig: lambda dim must equal d");
  require(count >= 1, "BrownianConfig: count must be >= 1");
}

BrownianMethod brownian_method_from_name(const std::string& name) {
  if (name == "CholeskyJoint" || name == "cholesky") {
    return BrownianMethod::CholeskyJoint;
  }
  if (name == "IncrementalWalk" || name == "walk") {
    return BrownianMethod::IncrementalWalk;
  }
  throw ValidationError("unknown simulation method: " + name);
}

MultivariateGP pre_bm_process(Index d, SpdMatrix lambda) {
  require(d >= 1 && lambda.dim() == d, "pre_bm_process: lambda dim mismatch");
  return MultivariateGP(MeanFunction::zero(d), KernelSpec::min_kernel(),
                        std::move(lambda));
}

Matrix min_gram(const std::vector<double>& times) {
  const Index n = static_cast<Index>(times.size());
  Matrix c(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      c(i, j) = std::min(times[static_cast<std::size_t>(i)],
                         times[static_cast<std::size_t>(j)]);
    }
  }
  return c;
}

PathEnsemble simulate(const BrownianConfig& config, BrownianMethod method) {
  config.validate();
  const bool has_zero = config.times.front() == 0.0;
  const Index n = static_cast<Index>(config.times.size());
  const Index d = config.d;
  PathEnsemble out{to_grid(config.times), {}, config.seed};
  out.draws.reserve(static_cast<std::size_t>(config.count));

  if (method == BrownianMethod::CholeskyJoint) {
    std::vector<double> positive(config.times.begin() + (has_zero ? 1 : 0),
                                 config.times.end());
    if (positive.empty()) {
      // grid is just {0}: every draw is the zero row
      for (int r = 0; r < config.count; ++r) {
        out.draws.push_back(Matrix::Zero(1, d));
      }
      return out;
    }
    const Index m = static_cast<Index>(positive.size());
    MatrixNormal joint(Matrix::Zero(m, d), SpdMatrix(min_gram(positive)),
                       config.lambda);
    std::vector<Matrix> body = sample(joint, config.count, config.seed);
    for (Matrix& b : body) {
      if (!has_zero) {
        out.draws.push_back(std::move(b));
        continue;
      }
      Matrix full = Matrix::Zero(n, d);
      full.bottomRows(m) = b;
      out.draws.push_back(std::move(full));
    }
    return out;
  }

  // IncrementalWalk: B starts at 0 at time 0 whether or not 0 is on the
  // grid; each step adds sqrt(dt) * eps * B_Lambda^T.
  SpdFactor lam = config.lambda.factor(FactorizePolicy::AllowJitter);
  Matrix mix_t = lam.lower().transpose();
  for (int r = 0; r < config.count; ++r) {
    rng::NormalStream stream(rng::substream(
        config.seed, kWalkStream, static_cast<std::uint64_t>(r)));
    Matrix path(n, d);
    Eigen::RowVectorXd current = Eigen::RowVectorXd::Zero(d);
    double prev_time = 0.0;
    Eigen::RowVectorXd eps(d);
    for (Index i = 0; i < n; ++i) {
      double t = config.times[static_cast<std::size_t>(i)];
      double dt = t - prev_time;
      if (dt > 0.0) {
        for (Index a = 0; a < d; ++a) eps(a) = stream.next();
        current += std::sqrt(dt) * eps * mix_t;
      }
      path.row(i) = current;
      prev_time = t;
    }
    out.draws.push_back(std::move(path));
  }
  return out;
}

IncrementReport increment_report(
    const PathEnsemble& ensemble, const SpdMatrix& lambda,
    const std::vector<std::pair<Index, Index>>& intervals) {
  require(!ensemble.draws.empty(), "increment_report: ensemble is empty");
  const Index n = static_cast<Index>(ensemble.grid.size());
  const Index d = ensemble.draws.front().cols();
  require(lambda.dim() == d, "increment_report: lambda dim mismatch");
  const auto r_count = static_cast<double>(ensemble.draws.size());

  for (const auto& [s, t] : intervals) {
    require(s >= 0 && s < n && t >= 0 && t < n,
            "increment_report: interval endpoint not on the grid");
  }
  auto time_at = [&](Index i) { return ensemble.grid[static_cast<std::size_t>(i)](0); };

  IncrementReport report;
  report.lambda_is_identity =
      (lambda.entries() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <=
      1e-12;

  const auto k = intervals.size();
  std::vector<Matrix> sums(k, Matrix::Zero(d, d));
  std::vector<Matrix> sumsqs(k, Matrix::Zero(d, d));
  std::vector<double> row_sum(k, 0.0), row_sumsq(k, 0.0);
  // disjoint pairs: ranges overlap at most at an endpoint
  std::vector<std::pair<std::size_t, std::size_t>> disjoint;
  for (std::size_t a = 0; a < k; ++a) {
    auto [s1, t1] = std::minmax(intervals[a].first, intervals[a].second);
    for (std::size_t b = a + 1; b < k; ++b) {
      auto [s2, t2] = std::minmax(intervals[b].first, intervals[b].second);
      if (time_at(t1) <= time_at(s2) || time_at(t2) <= time_at(s1)) {
        disjoint.emplace_back(a, b);
      }
    }
  }
  std::vector<double> cross_sum(disjoint.size(), 0.0);
  std::vector<double> cross_sumsq(disjoint.size(), 0.0);

  std::vector<Matrix> deltas(k);
  for (const Matrix& f : ensemble.draws) {
    for (std::size_t a = 0; a < k; ++a) {
      deltas[a] = f.row(intervals[a].second) - f.row(intervals[a].first);
      Matrix outer = deltas[a].transpose() * deltas[a];
      sums[a] += outer;
      sumsqs[a] += outer.cwiseProduct(outer);
      double scalar = deltas[a].squaredNorm();
      row_sum[a] += scalar;
      row_sumsq[a] += scalar * scalar;
    }
    for (std::size_t p = 0; p < disjoint.size(); ++p) {
      double z = deltas[disjoint[p].first]
                     .cwiseProduct(deltas[disjoint[p].second])
                     .sum();
      cross_sum[p] += z;
      cross_sumsq[p] += z * z;
    }
  }

  for (std::size_t a = 0; a < k; ++a) {
    IncrementEntry entry;
    entry.interval = intervals[a];
    entry.length = std::abs(time_at(intervals[a].second) -
                            time_at(intervals[a].first));
    entry.empirical = sums[a] / r_count;
    entry.target = entry.length * lambda.entries();
    entry.stderrs = Matrix(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        entry.stderrs(i, j) = sample_stderr(sums[a](i, j), sumsqs[a](i, j),
                                            r_count);
      }
    }
    entry.row_form_empirical = row_sum[a] / r_count;
    entry.row_form_target = static_cast<double>(d) * entry.length;
    entry.row_form_stderr = sample_stderr(row_sum[a], row_sumsq[a], r_count);
    report.increments.push_back(std::move(entry));
  }
  for (std::size_t p = 0; p < disjoint.size(); ++p) {
    CrossIncrementEntry entry;
    entry.first = intervals[disjoint[p].first];
    entry.second = intervals[disjoint[p].second];
    entry.trace = cross_sum[p] / r_count;
    entry.trace_stderr = sample_stderr(cross_sum[p], cross_sumsq[p], r_count);
    report.cross.push_back(entry);
  }
  return report;
}

}  // namespace mvgp
