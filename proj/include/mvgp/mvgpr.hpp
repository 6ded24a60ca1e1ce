#pragma once

#include "mvgp/kernels.hpp"
#include "mvgp/matnorm.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mvgp {

/// n paired observations: inputs X (n x p), outputs Y (n x d).
struct TrainingSet {
  Matrix x;
  Matrix y;

  void validate() const;
  Index n() const { return x.rows(); }
  Index input_dim() const { return x.cols(); }
  Index output_dim() const { return y.cols(); }
  InputList input_list() const;
};

/// Trained MV-GPR state. Lambda is parameterized as Phi Phi^T with Phi
/// lower triangular, positive diagonal, and Phi(0,0) fixed to 1, which
/// removes the (c K', Lambda / c) scale gauge. The factorization of
/// K'(X,X) is cached at construction; models are immutable.
class MvgprModel {
 public:
  MvgprModel(KernelSpec kernel, Matrix phi, TrainingSet training);

  const KernelSpec& kernel() const { return kernel_; }
  const Matrix& phi() const { return phi_; }
  const SpdMatrix& lambda() const { return lambda_; }
  const TrainingSet& training() const { return training_; }
  const SpdFactor& kxx_factor() const { return kxx_factor_; }
  const Matrix& kxx() const { return kxx_; }

  /// Free optimizer coordinates: kernel log params, log sigma_n^2 (absent
  /// when the noise variance is exactly 0, which pins it), then the free
  /// entries of Phi (row-major lower triangle, diagonal in log, Phi(0,0)
  /// excluded).
  Vector parameters() const;
  static MvgprModel from_parameters(const KernelSpec& kernel_template,
                                    const Vector& params,
                                    TrainingSet training);
  static Index parameter_count(const KernelSpec& kernel_template, Index d);
  std::vector<std::string> parameter_names() const;

 private:
  KernelSpec kernel_;
  Matrix phi_;
  TrainingSet training_;
  SpdMatrix lambda_;
  Matrix kxx_;
  SpdFactor kxx_factor_;
};

/// Negative log marginal likelihood of Y under MN(0, K'(X,X), Lambda),
/// computed in matrix form from the given parts.
double nll_from_parts(const Matrix& kprime, const Matrix& lambda,
                      const Matrix& y);

double nll(const MvgprModel& model, const TrainingSet& data);

/// Gradient of nll over the model's free coordinates (matches
/// MvgprModel::parameters order; the fixed Phi(0,0) has no coordinate).
Vector nll_grad(const MvgprModel& model, const TrainingSet& data);

struct FitConfig {
  int max_iterations = 200;
  double tolerance = 1e-6;   // max-norm gradient tolerance
  int restarts = 1;          // restart 0 starts from the kernel template
  std::uint64_t seed = 0;
};

struct FitReport {
  std::vector<double> nll_trace;  // winning restart, per accepted iteration
  double final_nll = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  int chosen_restart = 0;
  std::vector<double> restart_nlls;  // final nll per restart (nan = failed)
};

/// Maximum-likelihood fit by BFGS with backtracking line search.
/// Restarts beyond the first draw hyperparameters log-uniform on
/// [1e-2, 1e2] (Phi diagonal log-uniform on [0.3, 3], off-diagonals
/// uniform on [-1, 1]); the winner is (nll, restart index).
std::pair<MvgprModel, FitReport> fit(const TrainingSet& data,
                                     const KernelSpec& kernel_template,
                                     const FitConfig& config);

/// Predictive matrix-variate normal at test inputs:
///   M_hat = K_* K'(X,X)^-1 Y
///   Sigma_hat = K'(X_*,X_*) - K_* K'(X,X)^-1 K_*^T
///   Lambda_hat = Lambda
/// with K_* the m x n cross-Gram (noise-free; test indices differ from
/// training indices) and K'(X_*,X_*) carrying sigma_n^2 on its diagonal.
struct PredictiveDistribution {
  Matrix x_star;      // m x p
  Matrix mean;        // m x d
  SpdMatrix sigma;    // m x m
  SpdMatrix lambda;   // d x d, the model's Lambda
};

/// When latent is set, sigma_n^2 I is subtracted from Sigma_hat and the
/// result clamped to positive semi-definite (eigenvalue clipping).
PredictiveDistribution predict(const MvgprModel& model, const Matrix& x_star,
                               bool latent = false);

/// cov(vec(f_*^T)) = Sigma_hat (x) Lambda_hat.
SpdMatrix predictive_vec_cov(const PredictiveDistribution& pred);

}  // namespace mvgp
