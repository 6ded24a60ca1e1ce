#include "mvgp/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mvgp::io {

namespace {

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, delimiter)) cells.push_back(cell);
  if (!line.empty() && line.back() == delimiter) cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, std::size_t data_row,
                  const std::string& column) {
  std::string s = trim(raw);
  if (!s.empty()) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin + s.size() && std::isfinite(v)) return v;
  }
  throw ValidationError("cell at data row " + std::to_string(data_row) +
                        ", column '" + column + "' is not a finite number: '" +
                        raw + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "matrix JSON must be a nonempty array");
  const auto rows = static_cast<Index>(j.size());
  require(j[0].is_array() && !j[0].empty(),
          "matrix JSON rows must be nonempty arrays");
  const auto cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    require(static_cast<Index>(j[static_cast<std::size_t>(i)].size()) == cols,
            "matrix JSON rows must have equal length");
    for (Index c = 0; c < cols; ++c) {
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]
                    .get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j) {
  require(j.is_array(), "vector JSON must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) {
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json kernel_to_json(const KernelSpec& kernel) {
  json hyper = json::object();
  switch (kernel.family()) {
    case KernelFamily::SquaredExponential:
      hyper["signal_variance"] = kernel.signal_variance();
      hyper["length_scales"] = vector_to_json(kernel.length_scales());
      break;
    case KernelFamily::Min:
      break;
    case KernelFamily::Linear:
      hyper["bias"] = kernel.bias();
      hyper["slope"] = kernel.slope();
      break;
  }
  return json{{"family", family_name(kernel.family())},
              {"hyperparams", std::move(hyper)},
              {"noise_variance", kernel.noise_variance()}};
}

KernelSpec kernel_from_json(const json& j) {
  KernelFamily family = family_from_name(j.at("family").get<std::string>());
  double noise = j.value("noise_variance", 0.0);
  const json& hyper = j.contains("hyperparams") ? j.at("hyperparams")
                                                : json::object();
  switch (family) {
    case KernelFamily::SquaredExponential: {
      double sv = hyper.value("signal_variance", 1.0);
      Vector ls;
      if (hyper.contains("length_scales")) {
        ls = vector_from_json(hyper.at("length_scales"));
      } else if (hyper.contains("length_scale")) {
        ls = Vector::Constant(1, hyper.at("length_scale").get<double>());
      } else {
        ls = Vector::Ones(1);
      }
      return KernelSpec::squared_exponential(sv, std::move(ls), noise);
    }
    case KernelFamily::Min:
      return KernelSpec::min_kernel(noise);
    case KernelFamily::Linear:
      return KernelSpec::linear(hyper.value("bias", 0.0),
                                hyper.value("slope", 1.0), noise);
  }
  throw ValidationError("unknown kernel family in JSON");
}

json process_to_json(const MultivariateGP& mgp) {
  json mean;
  switch (mgp.mean().form()) {
    case MeanFunction::Form::Zero:
      mean = json{{"form", "Zero"}};
      break;
    case MeanFunction::Form::Constant:
      mean = json{{"form", "Constant"},
                  {"value", vector_to_json(mgp.mean().constant_value())}};
      break;
    case MeanFunction::Form::Tabulated: {
      json table = json::array();
      for (const auto& [t, v] : mgp.mean().table()) {
        table.push_back(json{{"t", vector_to_json(t)},
                             {"value", vector_to_json(v)}});
      }
      mean = json{{"form", "Tabulated"}, {"table", std::move(table)}};
      break;
    }
  }
  return json{{"mean", std::move(mean)},
              {"kernel", kernel_to_json(mgp.kernel())},
              {"lambda", matrix_to_json(mgp.lambda().entries())},
              {"output_dim", mgp.output_dim()}};
}

MultivariateGP process_from_json(const json& j) {
  SpdMatrix lambda(matrix_from_json(j.at("lambda")));
  const json& jm = j.at("mean");
  std::string form = jm.at("form").get<std::string>();
  MeanFunction mean = MeanFunction::zero(lambda.dim());
  if (form == "Constant") {
    mean = MeanFunction::constant(vector_from_json(jm.at("value")));
  } else if (form == "Tabulated") {
    std::vector<std::pair<Vector, Vector>> table;
    for (const json& row : jm.at("table")) {
      table.emplace_back(vector_from_json(row.at("t")),
                         vector_from_json(row.at("value")));
    }
    mean = MeanFunction::tabulated(std::move(table));
  } else {
    require(form == "Zero", "unknown mean form: " + form);
  }
  return MultivariateGP(std::move(mean), kernel_from_json(j.at("kernel")),
                        std::move(lambda));
}

json fit_report_to_json(const FitReport& report) {
  return json{{"nll_trace", report.nll_trace},
              {"final_nll", report.final_nll},
              {"final_grad_norm", report.final_grad_norm},
              {"converged", report.converged},
              {"iterations", report.iterations},
              {"chosen_restart", report.chosen_restart},
              {"restart_nlls", report.restart_nlls}};
}

FitReport fit_report_from_json(const json& j) {
  FitReport r;
  r.nll_trace = j.value("nll_trace", std::vector<double>{});
  r.final_nll = j.value("final_nll", 0.0);
  r.final_grad_norm = j.value("final_grad_norm", 0.0);
  r.converged = j.value("converged", false);
  r.iterations = j.value("iterations", 0);
  r.chosen_restart = j.value("chosen_restart", 0);
  r.restart_nlls = j.value("restart_nlls", std::vector<double>{});
  return r;
}

json model_to_json(const MvgprModel& model, const FitReport& report,
                   std::optional<std::string> timestamp) {
  json phi = json::array();
  for (Index i = 0; i < model.phi().rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j <= i; ++j) row.push_back(model.phi()(i, j));
    phi.push_back(std::move(row));
  }
  json out{{"kernel", kernel_to_json(model.kernel())},
           {"phi", std::move(phi)},
           {"training",
            json{{"x", matrix_to_json(model.training().x)},
                 {"y", matrix_to_json(model.training().y)}}},
           {"fit_report", fit_report_to_json(report)}};
  if (timestamp) out["timestamp"] = *timestamp;
  return out;
}

std::pair<MvgprModel, FitReport> model_from_json(const json& j) {
  KernelSpec kernel = kernel_from_json(j.at("kernel"));
  const json& jphi = j.at("phi");
  const auto d = static_cast<Index>(jphi.size());
  Matrix phi = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    const json& row = jphi[static_cast<std::size_t>(i)];
    require(static_cast<Index>(row.size()) == i + 1,
            "phi rows must have lengths 1..d");
    for (Index c = 0; c <= i; ++c) {
      phi(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  TrainingSet data{matrix_from_json(j.at("training").at("x")),
                   matrix_from_json(j.at("training").at("y"))};
  FitReport report = j.contains("fit_report")
                         ? fit_report_from_json(j.at("fit_report"))
                         : FitReport{};
  return {MvgprModel(std::move(kernel), std::move(phi), std::move(data)),
          std::move(report)};
}

json increment_report_to_json(const IncrementReport& report,
                              std::optional<std::string> timestamp) {
  json increments = json::array();
  for (const IncrementEntry& e : report.increments) {
    increments.push_back(
        json{{"interval", {e.interval.first, e.interval.second}},
             {"length", e.length},
             {"empirical", matrix_to_json(e.empirical)},
             {"target", matrix_to_json(e.target)},
             {"stderr", matrix_to_json(e.stderrs)},
             {"row_form",
              json{{"empirical", e.row_form_empirical},
                   {"target", e.row_form_target},
                   {"stderr", e.row_form_stderr},
                   {"target_valid", report.lambda_is_identity}}}});
  }
  json cross = json::array();
  for (const CrossIncrementEntry& e : report.cross) {
    cross.push_back(json{{"first", {e.first.first, e.first.second}},
                         {"second", {e.second.first, e.second.second}},
                         {"trace", e.trace},
                         {"trace_stderr", e.trace_stderr},
                         {"target", 0.0}});
  }
  json out{{"increments", std::move(increments)},
           {"cross_increments", std::move(cross)},
           {"lambda_is_identity", report.lambda_is_identity}};
  if (timestamp) out["timestamp"] = *timestamp;
  return out;
}

TrainingSet parse_dataset(const DatasetFile& file) {
  std::ifstream in(file.path);
  require(in.good(), "cannot open dataset file: " + file.path);
  std::string line;
  std::vector<std::string> header;
  if (file.has_header) {
    require(static_cast<bool>(std::getline(in, line)),
            "dataset file is empty: " + file.path);
    header = split(line, file.delimiter);
    for (std::string& h : header) h = trim(h);
  }
  auto column_index = [&](const std::string& name) -> std::size_t {
    if (file.has_header) {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
      }
      throw ValidationError("column '" + name + "' not found in " + file.path);
    }
    // headerless files address columns by 1-based number
    try {
      std::size_t idx = static_cast<std::size_t>(std::stoul(name));
      require(idx >= 1, "column numbers are 1-based");
      return idx - 1;
    } catch (const std::exception&) {
      throw ValidationError("headerless dataset needs numeric column names; "
                            "got '" + name + "'");
    }
  };

  std::vector<std::size_t> in_idx, out_idx;
  for (const std::string& c : file.input_columns) in_idx.push_back(column_index(c));
  for (const std::string& c : file.output_columns) out_idx.push_back(column_index(c));
  require(!in_idx.empty(), "no input columns declared");

  std::vector<std::vector<double>> x_rows, y_rows;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++data_row;
    std::vector<std::string> cells = split(line, file.delimiter);
    auto cell_at = [&](std::size_t idx, const std::string& name) {
      require(idx < cells.size(), "data row " + std::to_string(data_row) +
                                      " has no column '" + name + "'");
      return parse_cell(cells[idx], data_row, name);
    };
    std::vector<double> xr, yr;
    for (std::size_t c = 0; c < in_idx.size(); ++c) {
      xr.push_back(cell_at(in_idx[c], file.input_columns[c]));
    }
    for (std::size_t c = 0; c < out_idx.size(); ++c) {
      yr.push_back(cell_at(out_idx[c], file.output_columns[c]));
    }
    x_rows.push_back(std::move(xr));
    y_rows.push_back(std::move(yr));
  }
  require(data_row >= 1, "dataset has no data rows: " + file.path);

  TrainingSet data;
  data.x = Matrix(static_cast<Index>(x_rows.size()),
                  static_cast<Index>(in_idx.size()));
  data.y = Matrix(static_cast<Index>(y_rows.size()),
                  static_cast<Index>(out_idx.size()));
  for (Index i = 0; i < data.x.rows(); ++i) {
    for (Index j = 0; j < data.x.cols(); ++j) {
      data.x(i, j) = x_rows[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(j)];
    }
    for (Index j = 0; j < data.y.cols(); ++j) {
      data.y(i, j) = y_rows[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(j)];
    }
  }
  return data;
}

Matrix parse_inputs(const DatasetFile& file) {
  DatasetFile inputs_only = file;
  inputs_only.output_columns.clear();
  TrainingSet data = parse_dataset(inputs_only);
  return data.x;
}

void write_training_csv(const TrainingSet& data,
                        const std::vector<std::string>& input_columns,
                        const std::vector<std::string>& output_columns,
                        const std::string& path) {
  require(static_cast<Index>(input_columns.size()) == data.x.cols() &&
              static_cast<Index>(output_columns.size()) == data.y.cols(),
          "write_training_csv: column name counts must match data");
  std::ostringstream os;
  for (std::size_t i = 0; i < input_columns.size(); ++i) {
    os << (i ? "," : "") << input_columns[i];
  }
  for (const std::string& c : output_columns) os << "," << c;
  os << "\n";
  for (Index i = 0; i < data.x.rows(); ++i) {
    for (Index j = 0; j < data.x.cols(); ++j) {
      os << (j ? "," : "") << format_double(data.x(i, j));
    }
    for (Index j = 0; j < data.y.cols(); ++j) {
      os << "," << format_double(data.y(i, j));
    }
    os << "\n";
  }
  write_text_file(path, os.str());
}

void write_paths_csv(const PathEnsemble& ensemble, const std::string& path) {
  require(!ensemble.draws.empty(), "write_paths_csv: empty ensemble");
  const Index p = ensemble.grid.empty() ? 0 : ensemble.grid.front().size();
  const Index d = ensemble.draws.front().cols();
  std::ostringstream os;
  if (p == 1) {
    os << "t";
  } else {
    for (Index j = 0; j < p; ++j) os << (j ? "," : "") << "t_" << (j + 1);
  }
  os << ",draw_index";
  for (Index j = 0; j < d; ++j) os << ",f_" << (j + 1);
  os << "\n";
  for (std::size_t r = 0; r < ensemble.draws.size(); ++r) {
    const Matrix& f = ensemble.draws[r];
    for (std::size_t i = 0; i < ensemble.grid.size(); ++i) {
      const Vector& t = ensemble.grid[i];
      for (Index j = 0; j < p; ++j) {
        os << (j ? "," : "") << format_double(t(j));
      }
      os << "," << r;
      for (Index j = 0; j < d; ++j) {
        os << "," << format_double(f(static_cast<Index>(i), j));
      }
      os << "\n";
    }
  }
  write_text_file(path, os.str());
}

void write_prediction_csv(const PredictiveDistribution& pred,
                          const std::string& path) {
  const Index p = pred.x_star.cols();
  const Index d = pred.mean.cols();
  std::ostringstream os;
  for (Index j = 0; j < p; ++j) os << (j ? "," : "") << "x*_" << (j + 1);
  for (Index j = 0; j < d; ++j) os << ",mean_" << (j + 1);
  for (Index j = 0; j < d; ++j) os << ",sd_" << (j + 1);
  os << "\n";
  for (Index i = 0; i < pred.x_star.rows(); ++i) {
    for (Index j = 0; j < p; ++j) {
      os << (j ? "," : "") << format_double(pred.x_star(i, j));
    }
    for (Index j = 0; j < d; ++j) os << "," << format_double(pred.mean(i, j));
    for (Index j = 0; j < d; ++j) {
      double sd = std::sqrt(std::max(0.0, pred.sigma.entries()(i, i) *
                                              pred.lambda.entries()(j, j)));
      os << "," << format_double(sd);
    }
    os << "\n";
  }
  write_text_file(path, os.str());
}

void write_increment_csv(const IncrementReport& report,
                         const std::string& path) {
  std::ostringstream os;
  os << "kind,interval,entry,target,empirical,stderr\n";
  for (const IncrementEntry& e : report.increments) {
    std::string iv = std::to_string(e.interval.first) + ":" +
                     std::to_string(e.interval.second);
    const Index d = e.empirical.rows();
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        os << "second_moment," << iv << "," << i << ":" << j << ","
           << format_double(e.target(i, j)) << ","
           << format_double(e.empirical(i, j)) << ","
           << format_double(e.stderrs(i, j)) << "\n";
      }
    }
    os << "row_form," << iv << ",scalar,"
       << format_double(e.row_form_target) << ","
       << format_double(e.row_form_empirical) << ","
       << format_double(e.row_form_stderr) << "\n";
  }
  for (const CrossIncrementEntry& e : report.cross) {
    os << "cross_trace," << e.first.first << ":" << e.first.second << "|"
       << e.second.first << ":" << e.second.second << ",trace,0,"
       << format_double(e.trace) << "," << format_double(e.trace_stderr)
       << "\n";
  }
  write_text_file(path, os.str());
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open file for writing: " + path);
  out << contents;
  require(out.good(), "failed writing file: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json_file(const std::string& path) {
  return json::parse(read_text_file(path));
}

}  // namespace mvgp::io
