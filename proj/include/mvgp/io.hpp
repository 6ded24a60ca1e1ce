#pragma once

#include "mvgp/brownian.hpp"
#include "mvgp/mvgpr.hpp"
#include "mvgp/process.hpp"

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mvgp::io {

using json = nlohmann::json;

// ---- JSON (row-major nested arrays for matrices) ----

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

json kernel_to_json(const KernelSpec& kernel);
KernelSpec kernel_from_json(const json& j);

json process_to_json(const MultivariateGP& mgp);
MultivariateGP process_from_json(const json& j);

/// Model file: kernel spec, phi rows, embedded training data, fit report.
json model_to_json(const MvgprModel& model, const FitReport& report,
                   std::optional<std::string> timestamp);
std::pair<MvgprModel, FitReport> model_from_json(const json& j);

json fit_report_to_json(const FitReport& report);
FitReport fit_report_from_json(const json& j);

json increment_report_to_json(const IncrementReport& report,
                              std::optional<std::string> timestamp);

// ---- CSV ----

/// Declared shape of a delimited dataset file.
struct DatasetFile {
  std::string path;
  char delimiter = ',';
  bool has_header = true;
  std::vector<std::string> input_columns;
  std::vector<std::string> output_columns;
};

/// Reads the declared input/output columns into a TrainingSet. Errors
/// name the missing column or locate the unparseable cell (1-based data
/// row, column name).
TrainingSet parse_dataset(const DatasetFile& file);

/// Inputs-only variant (prediction locations); output_columns ignored.
Matrix parse_inputs(const DatasetFile& file);

void write_training_csv(const TrainingSet& data,
                        const std::vector<std::string>& input_columns,
                        const std::vector<std::string>& output_columns,
                        const std::string& path);

/// Path ensemble: columns t (or t_1..t_p), draw_index, f_1..f_d.
void write_paths_csv(const PathEnsemble& ensemble, const std::string& path);

/// Prediction: x*_1..x*_p, mean_1..mean_d, sd_1..sd_d with
/// sd_j(i) = sqrt(Sigma_ii Lambda_jj).
void write_prediction_csv(const PredictiveDistribution& pred,
                          const std::string& path);

/// Plot-ready increment report: interval, length, statistic, target,
/// empirical, stderr.
void write_increment_csv(const IncrementReport& report,
                         const std::string& path);

/// Shortest exact round-trip formatting for doubles (%.17g).
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);
json read_json_file(const std::string& path);

}  // namespace mvgp::io
