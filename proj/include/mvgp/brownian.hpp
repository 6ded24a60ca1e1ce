#pragma once

#include "mvgp/process.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace mvgp {

/// Simulation request for a d-variate pre-Brownian motion on a strictly
/// increasing time grid (t = 0 permitted only as first element).
struct BrownianConfig {
  std::vector<double> times;
  Index d;
  SpdMatrix lambda;
  int count;
  std::uint64_t seed;

  void validate() const;
};

enum class BrownianMethod { CholeskyJoint, IncrementalWalk };

BrownianMethod brownian_method_from_name(const std::string& name);

/// MGP_d(0, min(s,t), Lambda).
MultivariateGP pre_bm_process(Index d, SpdMatrix lambda);

/// The joint row covariance of the grid (min(t_i, t_j)); matches the
/// displayed C matrix structure.
Matrix min_gram(const std::vector<double>& times);

/// Simulates paths. CholeskyJoint samples the joint MN(0, C, Lambda)
/// directly; IncrementalWalk accumulates independent increments
/// B_{t_i} = B_{t_{i-1}} + sqrt(t_i - t_{i-1}) eps B_Lambda^T. A leading
/// t = 0 row is exactly zero in every draw (the joint is sampled on the
/// positive sub-grid and the zero row prepended).
PathEnsemble simulate(const BrownianConfig& config, BrownianMethod method);

/// One requested interval (s, t), given as grid indices.
struct IncrementEntry {
  std::pair<Index, Index> interval;  // grid indices, s < t allowed equal
  double length;                     // |t - s| in time units
  Matrix empirical;                  // mean of (B_t-B_s)^T (B_t-B_s), d x d
  Matrix target;                     // |t-s| Lambda
  Matrix stderrs;                    // entrywise Monte Carlo SE
  double row_form_empirical;         // mean of (B_t-B_s)(B_t-B_s)^T (scalar)
  double row_form_target;            // d |t-s| (valid when Lambda = I_d)
  double row_form_stderr;
};

/// Cross moment of two disjoint requested increments, trace statistic.
struct CrossIncrementEntry {
  std::pair<Index, Index> first;
  std::pair<Index, Index> second;
  double trace;         // empirical tr E[(dB_1)^T (dB_2)], target 0
  double trace_stderr;
};

struct IncrementReport {
  std::vector<IncrementEntry> increments;
  std::vector<CrossIncrementEntry> cross;
  bool lambda_is_identity;  // whether the d|t-s| row-form target applies
};

IncrementReport increment_report(
    const PathEnsemble& ensemble, const SpdMatrix& lambda,
    const std::vector<std::pair<Index, Index>>& intervals);

}  // namespace mvgp
