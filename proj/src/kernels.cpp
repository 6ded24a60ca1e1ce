#include "mvgp/kernels.hpp"

#include <cmath>

namespace mvgp {

std::string family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "SquaredExponential";
    case KernelFamily::Min: return "Min";
    case KernelFamily::Linear: return "Linear";
  }
  throw ValidationError("unknown kernel family");
}

KernelFamily family_from_name(const std::string& name) {
  if (name == "SquaredExponential") return KernelFamily::SquaredExponential;
  if (name == "Min") return KernelFamily::Min;
  if (name == "Linear") return KernelFamily::Linear;
  throw ValidationError("unknown kernel family: " + name);
}

KernelSpec KernelSpec::squared_exponential(double signal_variance,
                                           Vector length_scales,
                                           double noise_variance) {
  require(signal_variance > 0.0, "signal_variance must be > 0");
  require(length_scales.size() >= 1, "need at least one length scale");
  require((length_scales.array() > 0.0).all(), "length scales must be > 0");
  require(noise_variance >= 0.0, "noise_variance must be >= 0");
  KernelSpec k(KernelFamily::SquaredExponential, noise_variance);
  k.signal_variance_ = signal_variance;
  k.length_scales_ = std::move(length_scales);
  return k;
}

KernelSpec KernelSpec::min_kernel(double noise_variance) {
  require(noise_variance >= 0.0, "noise_variance must be >= 0");
  return KernelSpec(KernelFamily::Min, noise_variance);
}

KernelSpec KernelSpec::linear(double bias, double slope,
                              double noise_variance) {
  require(bias >= 0.0, "bias must be >= 0");
  require(slope > 0.0, "slope must be > 0");
  require(noise_variance >= 0.0, "noise_variance must be >= 0");
  KernelSpec k(KernelFamily::Linear, noise_variance);
  k.bias_ = bias;
  k.slope_ = slope;
  return k;
}

KernelSpec KernelSpec::with_noise_variance(double noise_variance) const {
  require(noise_variance >= 0.0, "noise_variance must be >= 0");
  KernelSpec k = *this;
  k.noise_variance_ = noise_variance;
  return k;
}

double KernelSpec::signal_variance() const {
  require(family_ == KernelFamily::SquaredExponential,
          "signal_variance: not a SquaredExponential kernel");
  return signal_variance_;
}

const Vector& KernelSpec::length_scales() const {
  require(family_ == KernelFamily::SquaredExponential,
          "length_scales: not a SquaredExponential kernel");
  return length_scales_;
}

double KernelSpec::bias() const {
  require(family_ == KernelFamily::Linear, "bias: not a Linear kernel");
  return bias_;
}

double KernelSpec::slope() const {
  require(family_ == KernelFamily::Linear, "slope: not a Linear kernel");
  return slope_;
}

void KernelSpec::check_input(const Vector& x) const {
  switch (family_) {
    case KernelFamily::SquaredExponential:
      require(x.size() == length_scales_.size(),
              "input dimension must match the number of length scales");
      break;
    case KernelFamily::Min:
      require(x.size() == 1, "Min kernel requires scalar inputs");
      require(x(0) >= 0.0, "Min kernel requires nonnegative inputs");
      break;
    case KernelFamily::Linear:
      require(x.size() >= 1, "Linear kernel requires nonempty inputs");
      break;
  }
}

double KernelSpec::eval(const Vector& x, const Vector& y) const {
  check_input(x);
  check_input(y);
  require(x.size() == y.size(), "eval: input dimension mismatch");
  switch (family_) {
    case KernelFamily::SquaredExponential: {
      double q = ((x - y).array() / length_scales_.array()).square().sum();
      return signal_variance_ * std::exp(-0.5 * q);
    }
    case KernelFamily::Min:
      return std::min(x(0), y(0));
    case KernelFamily::Linear:
      return bias_ + slope_ * x.dot(y);
  }
  throw ValidationError("unknown kernel family");
}

Index KernelSpec::param_count() const {
  switch (family_) {
    case KernelFamily::SquaredExponential: return 1 + length_scales_.size();
    case KernelFamily::Min: return 0;
    case KernelFamily::Linear: return 2;
  }
  return 0;
}

Vector KernelSpec::log_params() const {
  Vector p(param_count());
  switch (family_) {
    case KernelFamily::SquaredExponential:
      p(0) = std::log(signal_variance_);
      for (Index i = 0; i < length_scales_.size(); ++i) {
        p(1 + i) = std::log(length_scales_(i));
      }
      break;
    case KernelFamily::Min:
      break;
    case KernelFamily::Linear:
      require(bias_ > 0.0, "log_params: Linear bias must be > 0 to optimize");
      p(0) = std::log(bias_);
      p(1) = std::log(slope_);
      break;
  }
  return p;
}

KernelSpec KernelSpec::with_log_params(const Vector& log_params) const {
  require(log_params.size() == param_count(),
          "with_log_params: wrong parameter count");
  KernelSpec k = *this;
  switch (family_) {
    case KernelFamily::SquaredExponential:
      k.signal_variance_ = std::exp(log_params(0));
      for (Index i = 0; i < length_scales_.size(); ++i) {
        k.length_scales_(i) = std::exp(log_params(1 + i));
      }
      break;
    case KernelFamily::Min:
      break;
    case KernelFamily::Linear:
      k.bias_ = std::exp(log_params(0));
      k.slope_ = std::exp(log_params(1));
      break;
  }
  return k;
}

std::vector<std::string> KernelSpec::param_names() const {
  switch (family_) {
    case KernelFamily::SquaredExponential: {
      std::vector<std::string> names{"log_signal_variance"};
      for (Index i = 0; i < length_scales_.size(); ++i) {
        names.push_back("log_length_scale_" + std::to_string(i + 1));
      }
      return names;
    }
    case KernelFamily::Min:
      return {};
    case KernelFamily::Linear:
      return {"log_bias", "log_slope"};
  }
  return {};
}

Vector KernelSpec::eval_log_param_grad(const Vector& x,
                                       const Vector& y) const {
  Vector g(param_count());
  switch (family_) {
    case KernelFamily::SquaredExponential: {
      double k = eval(x, y);
      g(0) = k;  // dk/d log sf2 = k
      for (Index p = 0; p < length_scales_.size(); ++p) {
        double r = (x(p) - y(p)) / length_scales_(p);
        g(1 + p) = k * r * r;  // dk/d log l_p = k (x_p-y_p)^2 / l_p^2
      }
      break;
    }
    case KernelFamily::Min:
      break;
    case KernelFamily::Linear:
      g(0) = bias_;
      g(1) = slope_ * x.dot(y);
      break;
  }
  return g;
}

GramMatrix gram(const KernelSpec& kernel, const InputList& left,
                const std::optional<InputList>& right) {
  require(!left.empty(), "gram: input list must be nonempty");
  if (right.has_value()) {
    require(!right->empty(), "gram: input list must be nonempty");
    Matrix m(static_cast<Index>(left.size()),
             static_cast<Index>(right->size()));
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        m(i, j) = kernel.eval(left[static_cast<std::size_t>(i)],
                              (*right)[static_cast<std::size_t>(j)]);
      }
    }
    return {std::move(m), left, *right, false};
  }
  // upper triangle, mirrored for exact symmetry
  Matrix m(static_cast<Index>(left.size()), static_cast<Index>(left.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i; j < m.cols(); ++j) {
      m(i, j) = kernel.eval(left[static_cast<std::size_t>(i)],
                            left[static_cast<std::size_t>(j)]);
      m(j, i) = m(i, j);
    }
  }
  return {std::move(m), left, left, true};
}

GramMatrix noisy_gram(const KernelSpec& kernel, const InputList& inputs) {
  GramMatrix g = gram(kernel, inputs);
  g.entries.diagonal().array() += kernel.noise_variance();
  return g;
}

std::vector<Matrix> gram_log_param_grads(const KernelSpec& kernel,
                                         const InputList& inputs) {
  require(!inputs.empty(), "gram_log_param_grads: inputs must be nonempty");
  const Index n = static_cast<Index>(inputs.size());
  std::vector<Matrix> grads(static_cast<std::size_t>(kernel.param_count()),
                            Matrix::Zero(n, n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      Vector g = kernel.eval_log_param_grad(inputs[static_cast<std::size_t>(i)],
                                            inputs[static_cast<std::size_t>(j)]);
      for (Index p = 0; p < g.size(); ++p) {
        grads[static_cast<std::size_t>(p)](i, j) = g(p);
        grads[static_cast<std::size_t>(p)](j, i) = g(p);
      }
    }
  }
  return grads;
}

}  // namespace mvgp
