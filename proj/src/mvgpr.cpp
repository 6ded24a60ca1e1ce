#include "mvgp/mvgpr.hpp"

#include "mvgp/rng.hpp"

#include <cmath>
#include <limits>

namespace mvgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kRestartStream = 0x666974726573ULL;  // "fitres"

Matrix build_kxx(const KernelSpec& kernel, const TrainingSet& data) {
  return noisy_gram(kernel, data.input_list()).entries;
}

}  // namespace

void TrainingSet::validate() const {
  require(x.rows() >= 1, "TrainingSet: need at least one observation");
  require(x.rows() == y.rows(), "TrainingSet: X and Y row counts differ");
  require(y.cols() >= 1, "TrainingSet: outputs must be nonempty");
  require(x.allFinite() && y.allFinite(),
          "TrainingSet: non-finite values are not allowed");
}

InputList TrainingSet::input_list() const {
  InputList inputs;
  inputs.reserve(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) {
    inputs.push_back(x.row(i).transpose());
  }
  return inputs;
}

MvgprModel::MvgprModel(KernelSpec kernel, Matrix phi, TrainingSet training)
    : kernel_(std::move(kernel)),
      phi_(std::move(phi)),
      training_(std::move(training)),
      lambda_(SpdMatrix(Matrix::Identity(1, 1))),
      kxx_factor_(Matrix::Identity(1, 1), 0.0) {
  training_.validate();
  const Index d = training_.output_dim();
  require(phi_.rows() == d && phi_.cols() == d,
          "MvgprModel: Phi must be d x d");
  require(phi_(0, 0) == 1.0, "MvgprModel: Phi(0,0) is fixed to 1");
  for (Index i = 0; i < d; ++i) {
    require(phi_(i, i) > 0.0, "MvgprModel: Phi diagonal must be positive");
    for (Index j = i + 1; j < d; ++j) {
      require(phi_(i, j) == 0.0, "MvgprModel: Phi must be lower triangular");
    }
  }
  lambda_ = SpdMatrix(phi_ * phi_.transpose());
  kxx_ = build_kxx(kernel_, training_);
  kxx_factor_ = factorize(kxx_, FactorizePolicy::AllowJitter);
}

Index MvgprModel::parameter_count(const KernelSpec& kernel_template,
                                  Index d) {
  // A zero noise variance is pinned (log-space cannot represent it); a
  // positive one is a free log-space coordinate.
  Index noise = kernel_template.noise_variance() > 0.0 ? 1 : 0;
  return kernel_template.param_count() + noise + (d * (d + 1)) / 2 - 1;
}

Vector MvgprModel::parameters() const {
  const Index d = training_.output_dim();
  Vector p(parameter_count(kernel_, d));
  Index k = 0;
  Vector kp = kernel_.log_params();
  for (Index i = 0; i < kp.size(); ++i) p(k++) = kp(i);
  if (kernel_.noise_variance() > 0.0) {
    p(k++) = std::log(kernel_.noise_variance());
  }
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) {
      if (i == 0 && j == 0) continue;
      p(k++) = (i == j) ? std::log(phi_(i, i)) : phi_(i, j);
    }
  }
  return p;
}

MvgprModel MvgprModel::from_parameters(const KernelSpec& kernel_template,
                                       const Vector& params,
                                       TrainingSet training) {
  training.validate();
  const Index d = training.output_dim();
  require(params.size() == parameter_count(kernel_template, d),
          "from_parameters: wrong parameter count");
  Index k = 0;
  Vector kp(kernel_template.param_count());
  for (Index i = 0; i < kp.size(); ++i) kp(i) = params(k++);
  KernelSpec kernel = kernel_template.with_log_params(kp);
  if (kernel_template.noise_variance() > 0.0) {
    // floor keeps the coordinate alive through exp underflow
    kernel = kernel.with_noise_variance(std::max(std::exp(params(k)), 1e-300));
    ++k;
  }
  Matrix phi = Matrix::Zero(d, d);
  phi(0, 0) = 1.0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) {
      if (i == 0 && j == 0) continue;
      phi(i, j) = (i == j) ? std::exp(params(k)) : params(k);
      ++k;
    }
  }
  return MvgprModel(std::move(kernel), std::move(phi), std::move(training));
}

std::vector<std::string> MvgprModel::parameter_names() const {
  std::vector<std::string> names = kernel_.param_names();
  if (kernel_.noise_variance() > 0.0) names.push_back("log_noise_variance");
  const Index d = training_.output_dim();
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) {
      if (i == 0 && j == 0) continue;
      std::string base = "phi_" + std::to_string(i + 1) + std::to_string(j + 1);
      names.push_back(i == j ? "log_" + base : base);
    }
  }
  return names;
}

double nll_from_parts(const Matrix& kprime, const Matrix& lambda,
                      const Matrix& y) {
  const double n = static_cast<double>(y.rows());
  const double d = static_cast<double>(y.cols());
  SpdFactor fk = factorize(kprime, FactorizePolicy::AllowJitter);
  SpdFactor fl = factorize(lambda, FactorizePolicy::AllowJitter);
  Matrix half = fk.solve_lower(y);
  Matrix white = fl.solve_lower(half.transpose());
  return 0.5 * (n * d * kLog2Pi + d * fk.log_det() + n * fl.log_det() +
                white.squaredNorm());
}

double nll(const MvgprModel& model, const TrainingSet& data) {
  data.validate();
  Matrix kprime = (&data == &model.training())
                      ? model.kxx()
                      : build_kxx(model.kernel(), data);
  return nll_from_parts(kprime, model.lambda().entries(), data.y);
}

Vector nll_grad(const MvgprModel& model, const TrainingSet& data) {
  data.validate();
  const Index n = data.n();
  const Index d = data.output_dim();
  Matrix kprime = (&data == &model.training())
                      ? model.kxx()
                      : build_kxx(model.kernel(), data);
  SpdFactor fk = factorize(kprime, FactorizePolicy::AllowJitter);
  SpdFactor fl = model.lambda().factor(FactorizePolicy::AllowJitter);

  Matrix kinv = fk.solve(Matrix::Identity(n, n));
  Matrix alpha = fk.solve(data.y);                       // K'^-1 Y
  Matrix lam_inv_alpha_t = fl.solve(alpha.transpose());  // Lambda^-1 alpha^T
  // W = d K'^-1 - alpha Lambda^-1 alpha^T; dnll/dtheta = 1/2 tr(W dK'/dtheta)
  Matrix w = static_cast<double>(d) * kinv - alpha * lam_inv_alpha_t;

  InputList inputs = data.input_list();
  std::vector<Matrix> kernel_grads = gram_log_param_grads(model.kernel(), inputs);

  Vector grad(MvgprModel::parameter_count(model.kernel(), d));
  Index g = 0;
  for (const Matrix& dk : kernel_grads) {
    grad(g++) = 0.5 * w.cwiseProduct(dk).sum();
  }
  if (model.kernel().noise_variance() > 0.0) {
    // dK'/d log sigma_n^2 = sigma_n^2 I
    grad(g++) = 0.5 * model.kernel().noise_variance() * w.trace();
  }

  // dnll/dLambda = 1/2 (n Lambda^-1 - Lambda^-1 S Lambda^-1), S = Y^T K'^-1 Y
  Matrix s = data.y.transpose() * alpha;
  Matrix lam_inv = fl.solve(Matrix::Identity(d, d));
  Matrix lam_inv_s = fl.solve(s);
  Matrix lam_inv_s_lam_inv = fl.solve(lam_inv_s.transpose()).transpose();
  Matrix dl = 0.5 * (static_cast<double>(n) * lam_inv - lam_inv_s_lam_inv);
  Matrix dphi = 2.0 * dl * model.phi();
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) {
      if (i == 0 && j == 0) continue;
      grad(g++) = (i == j) ? dphi(i, i) * model.phi()(i, i) : dphi(i, j);
    }
  }
  return grad;
}

namespace {

struct Objective {
  const TrainingSet& data;
  const KernelSpec& kernel_template;

  double value(const Vector& params) const {
    try {
      MvgprModel m = MvgprModel::from_parameters(kernel_template, params, data);
      double v = nll(m, m.training());
      return std::isfinite(v) ? v : kInf;
    } catch (const FactorizationError&) {
      return kInf;
    } catch (const ValidationError&) {
      return kInf;
    }
  }

  Vector gradient(const Vector& params) const {
    MvgprModel m = MvgprModel::from_parameters(kernel_template, params, data);
    return nll_grad(m, m.training());
  }
};

struct BfgsOutcome {
  Vector params;
  double value = kInf;
  std::vector<double> trace;
  double grad_norm = kInf;
  bool converged = false;
  int iterations = 0;
};

// BFGS on the inverse Hessian approximation with Armijo backtracking.
BfgsOutcome bfgs_minimize(const Objective& objective, Vector start,
                          int max_iterations, double tolerance) {
  BfgsOutcome out;
  const Index q = start.size();
  Vector x = std::move(start);
  double f = objective.value(x);
  if (!std::isfinite(f)) {
    return out;  // infeasible start
  }
  if (q == 0) {  // nothing to optimize (e.g. Min kernel, pinned noise, d=1)
    out.params = std::move(x);
    out.value = f;
    out.trace = {f};
    out.grad_norm = 0.0;
    out.converged = true;
    return out;
  }
  Vector g = objective.gradient(x);
  Matrix h = Matrix::Identity(q, q);
  out.trace.push_back(f);

  constexpr double kArmijo = 1e-4;
  for (int iter = 0; iter < max_iterations; ++iter) {
    out.grad_norm = g.cwiseAbs().maxCoeff();
    if (out.grad_norm <= tolerance) {
      out.converged = true;
      break;
    }
    Vector dir = -(h * g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {  // lost curvature; reset to steepest descent
      h = Matrix::Identity(q, q);
      dir = -g;
      slope = g.dot(dir);
    }
    double step = 1.0;
    double f_new = kInf;
    Vector x_new;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = x + step * dir;
      f_new = objective.value(x_new);
      if (f_new <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no acceptable step along this direction
    Vector g_new = objective.gradient(x_new);
    Vector s = x_new - x;
    Vector yv = g_new - g;
    double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      double rho = 1.0 / sy;
      Matrix eye = Matrix::Identity(q, q);
      Matrix left = eye - rho * s * yv.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
    }
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    out.trace.push_back(f);
    out.iterations = iter + 1;
  }
  out.grad_norm = g.cwiseAbs().maxCoeff();
  if (out.grad_norm <= tolerance) out.converged = true;
  out.params = std::move(x);
  out.value = f;
  return out;
}

Vector random_start(const KernelSpec& kernel_template, Index d,
                    std::mt19937_64& gen) {
  auto uniform = [&gen](double lo, double hi) {
    double u = (gen() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  };
  Vector p(MvgprModel::parameter_count(kernel_template, d));
  Index k = 0;
  // variances / length scales: log-uniform on [1e-2, 1e2]
  for (Index i = 0; i < kernel_template.param_count(); ++i) {
    p(k++) = uniform(std::log(1e-2), std::log(1e2));
  }
  if (kernel_template.noise_variance() > 0.0) {
    p(k++) = uniform(std::log(1e-2), std::log(1e2));  // log sigma_n^2
  }
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) {
      if (i == 0 && j == 0) continue;
      p(k++) = (i == j) ? uniform(std::log(0.3), std::log(3.0))
                        : uniform(-1.0, 1.0);
    }
  }
  return p;
}

}  // namespace

std::pair<MvgprModel, FitReport> fit(const TrainingSet& data,
                                     const KernelSpec& kernel_template,
                                     const FitConfig& config) {
  data.validate();
  require(config.max_iterations >= 1, "FitConfig: max_iterations must be >= 1");
  require(config.restarts >= 1, "FitConfig: restarts must be >= 1");
  require(config.tolerance > 0.0, "FitConfig: tolerance must be > 0");
  const Index d = data.output_dim();
  Objective objective{data, kernel_template};

  // restart 0: the template's own hyperparameters, Phi = I
  Vector start0(MvgprModel::parameter_count(kernel_template, d));
  {
    Index k = 0;
    Vector kp = kernel_template.log_params();
    for (Index i = 0; i < kp.size(); ++i) start0(k++) = kp(i);
    if (kernel_template.noise_variance() > 0.0) {
      start0(k++) = std::log(kernel_template.noise_variance());
    }
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j <= i; ++j) {
        if (i == 0 && j == 0) continue;
        start0(k++) = 0.0;  // Phi = I in free coordinates
      }
    }
  }

  FitReport report;
  std::optional<BfgsOutcome> best;
  int best_restart = -1;
  for (int r = 0; r < config.restarts; ++r) {
    Vector start = start0;
    if (r > 0) {
      std::mt19937_64 gen(rng::substream(config.seed, kRestartStream,
                                         static_cast<std::uint64_t>(r)));
      start = random_start(kernel_template, d, gen);
    }
    BfgsOutcome outcome = bfgs_minimize(objective, std::move(start),
                                        config.max_iterations,
                                        config.tolerance);
    report.restart_nlls.push_back(outcome.value);
    if (std::isfinite(outcome.value) &&
        (!best || outcome.value < best->value)) {
      best = std::move(outcome);
      best_restart = r;
    }
  }
  if (!best) {
    throw FactorizationError(
        "fit: every restart failed to factorize the training covariance");
  }
  report.nll_trace = best->trace;
  report.final_nll = best->value;
  report.final_grad_norm = best->grad_norm;
  report.converged = best->converged;
  report.iterations = best->iterations;
  report.chosen_restart = best_restart;
  MvgprModel model = MvgprModel::from_parameters(kernel_template,
                                                 best->params, data);
  return {std::move(model), std::move(report)};
}

namespace {

// Eigenvalue clipping onto the PSD cone; used for the latent predictive
// covariance after subtracting the noise floor.
Matrix clamp_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  Vector vals = es.eigenvalues().cwiseMax(0.0);
  Matrix out = es.eigenvectors() * vals.asDiagonal() *
               es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

PredictiveDistribution predict(const MvgprModel& model, const Matrix& x_star,
                               bool latent) {
  require(x_star.rows() >= 1, "predict: need at least one test input");
  require(x_star.cols() == model.training().input_dim(),
          "predict: test input dimension does not match training");
  const Index m = x_star.rows();
  InputList test;
  test.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) test.push_back(x_star.row(i).transpose());
  InputList train = model.training().input_list();

  // K_*: m x n cross-Gram; indices differ, so no noise term
  Matrix k_star = gram(model.kernel(), test, train).entries;
  // K'(X_*, X_*): noise on the diagonal (index-based delta within the set)
  Matrix k_test = noisy_gram(model.kernel(), test).entries;

  Matrix mean = k_star * model.kxx_factor().solve(model.training().y);
  Matrix sigma = k_test - k_star * model.kxx_factor().solve(k_star.transpose());
  sigma = 0.5 * (sigma + sigma.transpose());
  if (latent) {
    sigma.diagonal().array() -= model.kernel().noise_variance();
    sigma = clamp_psd(sigma);
  }
  return {x_star, std::move(mean), SpdMatrix(std::move(sigma)),
          model.lambda()};
}

SpdMatrix predictive_vec_cov(const PredictiveDistribution& pred) {
  return SpdMatrix(kronecker(pred.sigma.entries(), pred.lambda.entries()));
}

}  // namespace mvgp
