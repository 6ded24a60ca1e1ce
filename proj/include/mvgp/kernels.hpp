#pragma once

#include "mvgp/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mvgp {

using InputList = std::vector<Vector>;

enum class KernelFamily { SquaredExponential, Min, Linear };

std::string family_name(KernelFamily family);
KernelFamily family_from_name(const std::string& name);

/// A covariance-function family with hyperparameters and an observation
/// noise level. The noise enters only through noisy_gram (the
/// noise-augmented kernel k' = k + delta_ij * sigma_n^2, delta on indices).
class KernelSpec {
 public:
  static KernelSpec squared_exponential(double signal_variance,
                                        Vector length_scales,
                                        double noise_variance = 0.0);
  static KernelSpec min_kernel(double noise_variance = 0.0);
  static KernelSpec linear(double bias, double slope,
                           double noise_variance = 0.0);

  KernelFamily family() const { return family_; }
  double noise_variance() const { return noise_variance_; }
  KernelSpec with_noise_variance(double noise_variance) const;

  double signal_variance() const;     // SquaredExponential
  const Vector& length_scales() const;  // SquaredExponential
  double bias() const;                // Linear
  double slope() const;               // Linear

  double eval(const Vector& x, const Vector& y) const;

  /// Hyperparameters optimized in log space (noise excluded; the
  /// regression module owns log sigma_n^2). Min has none.
  Index param_count() const;
  Vector log_params() const;
  KernelSpec with_log_params(const Vector& log_params) const;
  std::vector<std::string> param_names() const;

  /// dk/d(log theta_i) matching log_params order.
  Vector eval_log_param_grad(const Vector& x, const Vector& y) const;

 private:
  KernelSpec(KernelFamily family, double noise_variance)
      : family_(family), noise_variance_(noise_variance) {}
  void check_input(const Vector& x) const;

  KernelFamily family_;
  double signal_variance_ = 1.0;
  Vector length_scales_;
  double bias_ = 0.0;
  double slope_ = 1.0;
  double noise_variance_;
};

/// Matrix of pairwise kernel evaluations; square when right == left.
struct GramMatrix {
  Matrix entries;
  InputList left_inputs;
  InputList right_inputs;
  bool square;
};

/// Pairwise Gram; the square case is computed on the upper triangle and
/// mirrored so it is exactly symmetric.
GramMatrix gram(const KernelSpec& kernel, const InputList& left,
                const std::optional<InputList>& right = std::nullopt);

/// gram(kernel, inputs) + sigma_n^2 I. The Kronecker delta is index-based:
/// duplicated input locations at distinct indices get no off-diagonal noise.
GramMatrix noisy_gram(const KernelSpec& kernel, const InputList& inputs);

/// dK/d(log theta_i) over one input list, matching log_params order.
std::vector<Matrix> gram_log_param_grads(const KernelSpec& kernel,
                                         const InputList& inputs);

}  // namespace mvgp
