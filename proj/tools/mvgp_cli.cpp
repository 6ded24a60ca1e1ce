#include "mvgp/checks.hpp"
#include "mvgp/io.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace mvgp;

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

std::string iso_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(csv);
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> split_reals(const std::string& csv) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(csv);
  while (std::getline(is, item, ',')) {
    out.push_back(std::stod(item));
  }
  return out;
}

// --lambda accepts inline JSON ([[...]]) or a path to a JSON file.
SpdMatrix parse_lambda(const std::string& arg) {
  io::json j = (!arg.empty() && arg.front() == '[')
                   ? io::json::parse(arg)
                   : io::read_json_file(arg);
  return SpdMatrix(io::matrix_from_json(j));
}

// --kernel accepts a family name or a path to a kernel JSON.
KernelSpec parse_kernel(const std::string& arg, Index input_dim) {
  if (arg == "SquaredExponential" || arg == "se") {
    return KernelSpec::squared_exponential(1.0, Vector::Ones(input_dim), 0.01);
  }
  if (arg == "Min" || arg == "min") return KernelSpec::min_kernel(0.01);
  if (arg == "Linear" || arg == "linear") {
    return KernelSpec::linear(1.0, 1.0, 0.01);
  }
  return io::kernel_from_json(io::read_json_file(arg));
}

std::string replace_extension(const std::string& path,
                              const std::string& suffix) {
  auto dot = path.find_last_of('.');
  auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix;
}

struct CommonArgs {
  std::uint64_t seed = 0;
  bool no_timestamp = false;

  std::optional<std::string> timestamp() const {
    if (no_timestamp) return std::nullopt;
    return iso_timestamp();
  }
};

int run_fit(const std::string& data_path, const std::string& inputs,
            const std::string& outputs, const std::string& kernel_arg,
            const std::string& out_path, int restarts, int max_iter,
            double tol, const CommonArgs& common) {
  io::DatasetFile file;
  file.path = data_path;
  file.input_columns = split_names(inputs);
  file.output_columns = split_names(outputs);
  TrainingSet data = io::parse_dataset(file);
  KernelSpec kernel = parse_kernel(kernel_arg, data.input_dim());

  FitConfig config;
  config.restarts = restarts;
  config.max_iterations = max_iter;
  config.tolerance = tol;
  config.seed = common.seed;
  auto [model, report] = fit(data, kernel, config);

  io::json model_json = io::model_to_json(model, report, common.timestamp());
  io::write_text_file(out_path, model_json.dump(2) + "\n");
  io::json report_json = io::fit_report_to_json(report);
  if (auto ts = common.timestamp()) report_json["timestamp"] = *ts;
  io::write_text_file(replace_extension(out_path, ".report.json"),
                      report_json.dump(2) + "\n");
  std::cout << "fit: nll " << io::format_double(report.final_nll) << " after "
            << report.iterations << " iterations (restart "
            << report.chosen_restart << "), model written to " << out_path
            << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& inputs, const std::string& out_path,
                bool latent) {
  auto [model, report] = io::model_from_json(io::read_json_file(model_path));
  (void)report;
  io::DatasetFile file;
  file.path = data_path;
  file.input_columns = split_names(inputs);
  Matrix x_star = io::parse_inputs(file);
  PredictiveDistribution pred = predict(model, x_star, latent);
  io::write_prediction_csv(pred, out_path);
  io::json cov{{"sigma", io::matrix_to_json(pred.sigma.entries())},
               {"lambda", io::matrix_to_json(pred.lambda.entries())}};
  io::write_text_file(replace_extension(out_path, ".cov.json"),
                      cov.dump(2) + "\n");
  std::cout << "predict: " << x_star.rows() << " locations written to "
            << out_path << "\n";
  return 0;
}

int run_sample(const std::string& process_path, const std::string& times,
               int count, const std::string& out_path,
               const CommonArgs& common) {
  MultivariateGP mgp = io::process_from_json(io::read_json_file(process_path));
  InputList grid;
  for (double t : split_reals(times)) {
    Vector v(1);
    v(0) = t;
    grid.push_back(std::move(v));
  }
  PathEnsemble ensemble = sample_paths(mgp, grid, count, common.seed);
  io::write_paths_csv(ensemble, out_path);
  std::cout << "sample: " << count << " draws on " << grid.size()
            << " grid points written to " << out_path << "\n";
  return 0;
}

int run_simulate_bm(Index d, const std::string& times,
                    const std::string& lambda_arg, int count,
                    const std::string& method_name,
                    const std::string& out_path, const CommonArgs& common) {
  BrownianConfig config{split_reals(times), d,
                        lambda_arg.empty() ? SpdMatrix::identity(d)
                                           : parse_lambda(lambda_arg),
                        count, common.seed};
  PathEnsemble ensemble =
      simulate(config, brownian_method_from_name(method_name));
  io::write_paths_csv(ensemble, out_path);

  // default diagnostic intervals: consecutive steps plus the full span
  std::vector<std::pair<Index, Index>> intervals;
  const auto n = static_cast<Index>(config.times.size());
  for (Index i = 0; i + 1 < n; ++i) intervals.emplace_back(i, i + 1);
  if (n > 2) intervals.emplace_back(0, n - 1);
  if (!intervals.empty()) {
    IncrementReport report =
        increment_report(ensemble, config.lambda, intervals);
    io::write_text_file(
        replace_extension(out_path, ".increments.json"),
        io::increment_report_to_json(report, common.timestamp()).dump(2) + "\n");
    io::write_increment_csv(report,
                            replace_extension(out_path, ".increments.csv"));
  }
  std::cout << "simulate-bm: " << count << " paths on " << n
            << " times written to " << out_path << "\n";
  return 0;
}

int run_check(const CommonArgs& common) {
  auto results = checks::run_all_checks(common.seed);
  std::cout << checks::render_report(results, /*with_timing=*/false);
  bool ok = checks::all_passed(results);
  std::cout << (ok ? "all checks passed" : "CHECKS FAILED") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate Gaussian process toolkit"};
  app.require_subcommand(1);

  CommonArgs common;

  std::string data_path, inputs, outputs = "", kernel_arg = "se";
  std::string model_path, out_path, times, lambda_arg, method = "CholeskyJoint";
  int restarts = 1, max_iter = 200, count = 1;
  Index bm_d = 1;
  double tol = 1e-5;
  bool latent = false;

  auto add_common = [&common](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "RNG seed (all randomness)");
    cmd->add_flag("--no-timestamp", common.no_timestamp,
                  "omit timestamps from report files");
  };

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit an MV-GPR model");
  fit_cmd->add_option("--data", data_path, "training CSV")->required();
  fit_cmd->add_option("--inputs", inputs, "comma-separated input columns")
      ->required();
  fit_cmd->add_option("--outputs", outputs, "comma-separated output columns")
      ->required();
  fit_cmd->add_option("--kernel", kernel_arg,
                      "kernel family (se|min|linear) or kernel JSON path");
  fit_cmd->add_option("--out", out_path, "model JSON output")->required();
  fit_cmd->add_option("--restarts", restarts, "random restarts");
  fit_cmd->add_option("--max-iter", max_iter, "max optimizer iterations");
  fit_cmd->add_option("--tol", tol, "gradient tolerance");
  add_common(fit_cmd);

  CLI::App* predict_cmd =
      app.add_subcommand("predict", "predict at test inputs");
  predict_cmd->add_option("--model", model_path, "model JSON")->required();
  predict_cmd->add_option("--data", data_path, "test input CSV")->required();
  predict_cmd->add_option("--inputs", inputs, "comma-separated input columns")
      ->required();
  predict_cmd->add_option("--out", out_path, "prediction CSV")->required();
  predict_cmd->add_flag("--latent", latent,
                        "subtract noise variance from the predictive "
                        "covariance (clamped at PSD)");
  add_common(predict_cmd);

  CLI::App* sample_cmd =
      app.add_subcommand("sample", "sample process paths on a grid");
  sample_cmd->add_option("--model", model_path, "process spec JSON")
      ->required();
  sample_cmd->add_option("--times", times, "comma-separated grid points")
      ->required();
  sample_cmd->add_option("--count", count, "number of draws");
  sample_cmd->add_option("--out", out_path, "path CSV output")->required();
  add_common(sample_cmd);

  CLI::App* bm_cmd = app.add_subcommand(
      "simulate-bm", "simulate d-variate pre-Brownian motion");
  bm_cmd->add_option("--d", bm_d, "output dimension")->required();
  bm_cmd->add_option("--times", times, "comma-separated times")->required();
  bm_cmd->add_option("--lambda", lambda_arg,
                     "parameter matrix (inline JSON or path); default I_d");
  bm_cmd->add_option("--count", count, "number of draws");
  bm_cmd->add_option("--method", method, "CholeskyJoint | IncrementalWalk");
  bm_cmd->add_option("--out", out_path, "path CSV output")->required();
  add_common(bm_cmd);

  CLI::App* check_cmd =
      app.add_subcommand("check", "run the full property suite");
  add_common(check_cmd);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(fit_cmd)) {
      return run_fit(data_path, inputs, outputs, kernel_arg, out_path,
                     restarts, max_iter, tol, common);
    }
    if (app.got_subcommand(predict_cmd)) {
      return run_predict(model_path, data_path, inputs, out_path, latent);
    }
    if (app.got_subcommand(sample_cmd)) {
      return run_sample(model_path, times, count, out_path, common);
    }
    if (app.got_subcommand(bm_cmd)) {
      return run_simulate_bm(bm_d, times, lambda_arg, count, method, out_path,
                             common);
    }
    if (app.got_subcommand(check_cmd)) {
      return run_check(common);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  } catch (const FactorizationError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
