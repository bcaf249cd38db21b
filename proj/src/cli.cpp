#include "irgof/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "irgof/bandwidth.hpp"
#include "irgof/error.hpp"
#include "irgof/io.hpp"
#include "irgof/nulls.hpp"
#include "irgof/parallel.hpp"
#include "irgof/simulation.hpp"

namespace irgof {

namespace fs = std::filesystem;

std::string to_string(Command command) {
  switch (command) {
    case Command::Test: return "test";
    case Command::Simulate: return "simulate";
    case Command::Estimate: return "estimate";
    case Command::Image: return "image";
  }
  return "test";
}

namespace {

Command parse_command(const std::string& name) {
  if (name == "test") return Command::Test;
  if (name == "simulate") return Command::Simulate;
  if (name == "estimate") return Command::Estimate;
  if (name == "image") return Command::Image;
  fail(ErrorKind::Config, "unknown command '" + name + "'; options are: test simulate estimate image");
}

void check_output(const std::string& path, const char* flag) {
  if (path.empty()) return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    fail(ErrorKind::Io, std::string(flag) + ": directory '" + parent.string() + "' does not exist");
  }
  if (fs::is_directory(path)) fail(ErrorKind::Io, std::string(flag) + ": '" + path + "' is a directory");
}

std::size_t worker_count(const RunConfig& config) {
  return config.threads == 0 ? hardware_threads() : config.threads;
}

AnalysisOptions analysis_options(const RunConfig& config) {
  AnalysisOptions options;
  options.null = make_null(config.null_name);
  options.cv_grid = config.cv_grid;
  options.floor = config.floor;
  options.test.alpha = config.alpha;
  options.test.scan.grid_size = config.scan_grid;
  options.threads = worker_count(config);
  return options;
}

ReportContext report_context(const RunConfig& config, const Dataset& data) {
  ReportContext context;
  context.command = to_string(config.command);
  context.input = config.input;
  context.null_name = config.null_name;
  context.seed = config.seed;
  context.floor = config.floor;
  context.scan_grid = config.scan_grid;
  context.dim = data.dim();
  return context;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) out << text;
  else write_text(path, text);
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& matrix) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << matrix(i, j) << (j + 1 == matrix.cols() ? '\n' : ',');
  }
  write_text(path, out.str());
}

void write_residuals_csv(const fs::path& path, const Dataset& data, const RegressionFit& fitted) {
  std::ostringstream out;
  out.precision(17);
  for (int l = 0; l < data.dim(); ++l) out << 'x' << (l + 1) << ',';
  out << "y,fitted,residual,standardized\n";
  for (Eigen::Index j = 0; j < data.size(); ++j) {
    for (int l = 0; l < data.dim(); ++l) out << data.X(j, l) << ',';
    out << data.Y[j] << ',' << fitted.fitted()[j] << ',' << fitted.residuals().residuals()[j] << ','
        << fitted.residuals().standardized()[j] << '\n';
  }
  write_text(path, out.str());
}

// Fit evaluated on the midpoint grid ((i - 0.5)/G, ...) of the unit cube.
void write_fit_grid_csv(const fs::path& path, const RegressionFit& fitted, int dim, Eigen::Index per_axis) {
  double total = 1.0;
  for (int l = 0; l < dim; ++l) total *= static_cast<double>(per_axis);
  if (total > 1e6) fail(ErrorKind::Resource, "export grid would hold more than 10^6 points; lower --grid");
  const auto points = static_cast<Eigen::Index>(total);
  std::ostringstream out;
  out.precision(17);
  for (int l = 0; l < dim; ++l) out << 'x' << (l + 1) << ',';
  out << "fitted\n";
  Eigen::VectorXd x(dim);
  for (Eigen::Index p = 0; p < points; ++p) {
    Eigen::Index rest = p;
    for (int l = dim - 1; l >= 0; --l) {
      x[l] = (static_cast<double>(rest % per_axis) + 0.5) / static_cast<double>(per_axis);
      rest /= per_axis;
    }
    for (int l = 0; l < dim; ++l) out << x[l] << ',';
    out << fitted(x) << '\n';
  }
  write_text(path, out.str());
}

void write_test_outputs(const RunConfig& config, const Analysis& analysis, const ReportContext& context,
                        std::ostream& out) {
  emit(config.out, report_json(analysis, context), out);
  if (!config.trace_out.empty()) write_trace_csv(config.trace_out, analysis.report.trace);
  if (!config.qq_out.empty()) {
    write_qq_csv(config.qq_out, analysis.fit.residuals(), *make_null(config.null_name));
  }
}

void run_test(const RunConfig& config, std::ostream& out) {
  const Dataset data = load_csv(config.input);
  const Analysis analysis = analyze(data, analysis_options(config));
  ReportContext context = report_context(config, data);
  if (analysis.fit.clamped_count() > 0) {
    context.caveats.push_back("density estimate clamped at the floor for " +
                              std::to_string(analysis.fit.clamped_count()) + " observations");
  }
  write_test_outputs(config, analysis, context, out);
  if (!config.residuals_out.empty()) write_residuals_csv(config.residuals_out, data, analysis.fit);
}

void run_image(const RunConfig& config, std::ostream& out) {
  const Eigen::MatrixXd image = load_image(config.input);
  const Dataset data = image_section(image, config.row0, config.col0, config.size);
  const Analysis analysis = analyze(data, analysis_options(config));
  ReportContext context = report_context(config, data);
  context.caveats.push_back("covariates are the deterministic pixel-midpoint grid, not a random design");
  context.caveats.push_back("responses are Anscombe-transformed raw intensities");
  context.caveats.push_back("distortion '" + config.distortion +
                            "' recorded only; the test uses the estimated image K theta directly");
  if (analysis.fit.clamped_count() > 0) {
    context.caveats.push_back("density estimate clamped at the floor for " +
                              std::to_string(analysis.fit.clamped_count()) + " observations");
  }
  write_test_outputs(config, analysis, context, out);
  if (!config.fitted_out.empty()) {
    Eigen::MatrixXd fitted(config.size, config.size);
    for (Eigen::Index i = 0; i < config.size; ++i) {
      for (Eigen::Index j = 0; j < config.size; ++j) {
        fitted(i, j) = inverse_anscombe(analysis.fit.fitted()[i * config.size + j]);
      }
    }
    write_matrix_csv(config.fitted_out, fitted);
  }
  if (!config.residuals_out.empty()) write_residuals_csv(config.residuals_out, data, analysis.fit);
  if (!config.data_out.empty()) write_csv(config.data_out, data);
}

void run_estimate(const RunConfig& config, std::ostream& out) {
  const Dataset data = load_csv(config.input);
  const std::vector<double> grid =
      config.cv_grid.empty() ? default_cv_grid(data.size(), data.dim()) : config.cv_grid;
  const CvReport cv = cv_select(data, grid, config.floor, worker_count(config));
  const RegressionFit fitted = fit(data, enumerate_lattice(data.dim(), cv.chosen), config.floor);

  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = "estimate";
  j["input"] = config.input;
  j["n"] = data.size();
  j["dim"] = data.dim();
  j["chosen_radius"] = cv.chosen;
  j["lattice_size"] = fitted.lattice().size();
  j["sigma_hat"] = fitted.sigma();
  j["density_floor"] = config.floor;
  j["clamped_density_points"] = fitted.clamped_count();
  j["seed"] = config.seed;
  nlohmann::ordered_json candidates = nlohmann::ordered_json::array();
  for (const CvCandidate& c : cv.candidates) candidates.push_back({{"radius", c.radius}, {"score", c.score}});
  j["cv"] = {{"candidates", candidates}, {"chosen", cv.chosen}};
  emit(config.out, j.dump(2) + "\n", out);

  if (!config.fitted_out.empty()) write_fit_grid_csv(config.fitted_out, fitted, data.dim(), config.grid);
  if (!config.residuals_out.empty()) write_residuals_csv(config.residuals_out, data, fitted);
  if (!config.data_out.empty()) write_csv(config.data_out, data);
}

void run_simulate(const RunConfig& config, std::ostream& out) {
  PowerStudyConfig study;
  const Design design = parse_design(config.design);
  const Distortion distortion = parse_distortion(config.distortion);
  for (const std::string& name : config.errors) {
    study.scenarios.push_back({make_error_sampler(name), design, distortion});
  }
  study.sample_sizes = config.sample_sizes;
  study.reps = config.reps;
  study.seed = config.seed;
  study.analysis = analysis_options(config);
  study.threads = worker_count(config);
  const PowerTable table = power_study(study);

  if (config.out.empty()) out << power_csv(table);
  else if (fs::path(config.out).extension() == ".json") write_text(config.out, power_json(table, config.alpha));
  else write_text(config.out, power_csv(table));
}

}  // namespace

void validate(const RunConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) fail(ErrorKind::Config, "--alpha must lie in (0,1)");
  if (!(config.floor > 0.0 && std::isfinite(config.floor))) fail(ErrorKind::Config, "--floor must be positive");
  if (config.scan_grid < 2) fail(ErrorKind::Config, "--scan-grid must be at least 2");
  for (double r : config.cv_grid) {
    if (!(r > 0.0 && std::isfinite(r))) fail(ErrorKind::Config, "--cv-grid radii must be positive");
  }
  make_null(config.null_name);

  const bool needs_input = config.command != Command::Simulate;
  if (needs_input) {
    if (config.input.empty()) fail(ErrorKind::Config, to_string(config.command) + " needs an input file");
    if (!fs::is_regular_file(config.input)) {
      fail(ErrorKind::Io, "input '" + config.input + "' does not exist or is not a file");
    }
  }
  if (config.command == Command::Simulate) {
    if (config.reps < 1) fail(ErrorKind::Config, "--reps must be positive");
    if (config.errors.empty()) fail(ErrorKind::Config, "--errors needs at least one law");
    for (const std::string& name : config.errors) make_error_sampler(name);
    if (config.sample_sizes.empty()) fail(ErrorKind::Config, "--n needs at least one sample size");
    for (Eigen::Index n : config.sample_sizes) {
      if (n < 10) fail(ErrorKind::Config, "--n sample sizes must be at least 10");
    }
    parse_design(config.design);
  }
  parse_distortion(config.distortion);
  if (config.command == Command::Image) {
    if (config.size < 1 || config.row0 < 0 || config.col0 < 0) {
      fail(ErrorKind::Config, "--size must be positive and --row0/--col0 nonnegative");
    }
  }
  if (config.command == Command::Estimate && config.grid < 1) fail(ErrorKind::Config, "--grid must be positive");

  check_output(config.out, "--out");
  check_output(config.trace_out, "--trace-out");
  check_output(config.qq_out, "--qq-out");
  check_output(config.error_json, "--error-json");
  check_output(config.data_out, "--data-out");
  check_output(config.residuals_out, "--residuals-out");
  check_output(config.fitted_out, "--fitted-out");
}

ParseOutcome parse_command_line(int argc, const char* const* argv) {
  RunConfig config;
  std::string command;
  CLI::App app{"Goodness-of-fit testing for the error law of indirect regression models", "irgof"};
  app.set_config("--config", "", "flat key=value file using the flag names as keys");
  app.get_config_ptr()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  app.add_option("command", command, "test | simulate | estimate | image")->required();
  app.add_option("input", config.input, "CSV dataset (test, estimate) or PGM/CSV image (image)");

  app.add_option("--null", config.null_name, "null error law")->capture_default_str();
  app.add_option("--alpha", config.alpha, "significance level")->capture_default_str();
  app.add_option("--cv-grid", config.cv_grid, "candidate cutoff radii")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--floor", config.floor, "lower clamp for the covariate density")->capture_default_str();
  app.add_option("--scan-grid", config.scan_grid, "points on the scan-function grid")->capture_default_str();
  app.add_option("--seed", config.seed, "random seed")->capture_default_str();
  app.add_option("--threads", config.threads, "worker threads, 0 for all cores")->capture_default_str();

  app.add_option("--out", config.out, "report (JSON) or table (CSV, or JSON by extension)");
  app.add_option("--trace-out", config.trace_out, "transformed process trace CSV");
  app.add_option("--qq-out", config.qq_out, "QQ data CSV");
  app.add_option("--error-json", config.error_json, "write a JSON error record here on failure");
  app.add_option("--data-out", config.data_out, "dataset CSV");
  app.add_option("--residuals-out", config.residuals_out, "per-observation fit CSV");
  app.add_option("--fitted-out", config.fitted_out, "fitted values on a grid (estimate) or image (image)");

  app.add_option("--errors", config.errors, "error laws for simulate")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--n", config.sample_sizes, "sample sizes for simulate")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--reps", config.reps, "replications per cell")->capture_default_str();
  app.add_option("--design", config.design, "uniform | nontrivial-g")->capture_default_str();
  app.add_option("--distortion", config.distortion, "identity | laplace-product")->capture_default_str();

  app.add_option("--row0", config.row0, "first section row (0-based)")->capture_default_str();
  app.add_option("--col0", config.col0, "first section column (0-based)")->capture_default_str();
  app.add_option("--size", config.size, "section side length")->capture_default_str();
  app.add_option("--grid", config.grid, "evaluation points per axis for estimate")->capture_default_str();

  ParseOutcome outcome;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out;
    std::ostringstream err;
    outcome.exit_status = app.exit(e, out, err);
    outcome.message = out.str() + err.str();
    return outcome;
  }
  try {
    config.command = parse_command(command);
  } catch (const Error& e) {
    outcome.exit_status = 2;
    outcome.message = std::string(e.what()) + "\n";
    return outcome;
  }
  outcome.config = std::move(config);
  return outcome;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    switch (config.command) {
      case Command::Test: run_test(config, out); break;
      case Command::Image: run_image(config, out); break;
      case Command::Estimate: run_estimate(config, out); break;
      case Command::Simulate: run_simulate(config, out); break;
    }
    return 0;
  } catch (const std::exception& e) {
    const auto* error = dynamic_cast<const Error*>(&e);
    const std::string kind = error ? std::string(to_string(error->kind())) : "internal";
    err << "irgof: " << kind << " error: " << e.what() << '\n';
    if (!config.error_json.empty()) {
      try {
        write_text(config.error_json, error_json(kind, e.what()));
      } catch (const std::exception& nested) {
        err << "irgof: could not write error JSON: " << nested.what() << '\n';
      }
    }
    return 1;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ParseOutcome parsed = parse_command_line(argc, argv);
  if (!parsed.config) {
    (parsed.exit_status == 0 ? out : err) << parsed.message;
    return parsed.exit_status;
  }
  return run(*parsed.config, out, err);
}

}  // namespace irgof
