#pragma once

#include "mvgp/kernels.hpp"
#include "mvgp/matnorm.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mvgp {

/// Vector-valued mean function u: T -> R^d. Tabulated means are defined
/// only at their exact grid points and error elsewhere.
class MeanFunction {
 public:
  enum class Form { Zero, Constant, Tabulated };

  static MeanFunction zero(Index output_dim);
  static MeanFunction constant(Vector value);
  static MeanFunction tabulated(std::vector<std::pair<Vector, Vector>> table);

  Form form() const { return form_; }
  Index output_dim() const { return output_dim_; }
  const Vector& constant_value() const;
  const std::vector<std::pair<Vector, Vector>>& table() const { return table_; }

  Vector operator()(const Vector& t) const;

 private:
  MeanFunction(Form form, Index output_dim)
      : form_(form), output_dim_(output_dim) {}

  Form form_;
  Index output_dim_;
  Vector constant_;
  std::vector<std::pair<Vector, Vector>> table_;
};

/// The d-variate Gaussian process MGP_d(u, k, Lambda): every finite
/// restriction is MN(rows u(t_i), [k(t_i,t_j)], Lambda).
class MultivariateGP {
 public:
  MultivariateGP(MeanFunction mean, KernelSpec kernel, SpdMatrix lambda);

  const MeanFunction& mean() const { return mean_; }
  const KernelSpec& kernel() const { return kernel_; }
  const SpdMatrix& lambda() const { return lambda_; }
  Index output_dim() const { return lambda_.dim(); }

 private:
  MeanFunction mean_;
  KernelSpec kernel_;
  SpdMatrix lambda_;
};

struct PathEnsemble {
  InputList grid;
  std::vector<Matrix> draws;  // each n x d
  std::uint64_t seed;
};

/// Finite-dimensional law MN(M, K, Lambda) on the grid. K is the
/// noise-free Gram; observation noise belongs to the regression module.
MatrixNormal finite_dim(const MultivariateGP& mgp, const InputList& grid);

PathEnsemble sample_paths(const MultivariateGP& mgp, const InputList& grid,
                          int count, std::uint64_t seed);

/// Empirical checks of the three moment identities, in units of Monte
/// Carlo standard error:
///   (a) E[f(t)] = u(t) per grid point and output,
///   (b) E[(f(t_s)-u_s)(f(t_l)-u_l)^T] = tr(Lambda) k(t_s,t_l) per pair,
///   (c) E[(F-M)^T (F-M)] = tr(K) Lambda entrywise.
struct MomentReport {
  double max_mean_dev;   // (a), max |emp-target|/SE
  double max_cross_dev;  // (b)
  double max_col_dev;    // (c)
  double max_dev() const;
};

MomentReport check_moments(const PathEnsemble& ensemble,
                           const MultivariateGP& mgp);

/// Parameter-level stationarity check: finite_dim on grid and grid+h must
/// have identical mean and row covariance within tol (Lambda is
/// shift-independent by construction).
struct StationarityWitness {
  bool in_mean;  // violating entry in the mean (else in the row covariance)
  Index i;
  Index j;
  double base_value;
  double shifted_value;
  std::string describe() const;
};

struct StationarityResult {
  bool stationary;
  std::optional<StationarityWitness> witness;
};

StationarityResult is_strictly_stationary(const MultivariateGP& mgp,
                                          const InputList& grid,
                                          const Vector& shift, double tol);

/// If Lambda is diagonal (off-diagonals <= 1e-12 * max diagonal), the
/// components are independent scalar GPs with kernels Lambda_ii * k,
/// returned as 1-variate processes; otherwise nothing.
std::optional<std::vector<MultivariateGP>> independent_components(
    const MultivariateGP& mgp);

/// Empirical cross-component covariance E[(xi_i - m_i)(xi_j - m_j)^T]
/// over draws (xi_i = column i); its trace estimates tr(K) Lambda_ij.
struct CrossCovarianceEstimate {
  Matrix cov;           // n x n
  double trace;
  double trace_stderr;  // +inf when fewer than 2 draws
};

CrossCovarianceEstimate cross_covariance(const PathEnsemble& ensemble,
                                         Index i, Index j);

}  // namespace mvgp
