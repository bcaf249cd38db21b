#pragma once

// Synthetic indirect regression data and Monte-Carlo level/power studies.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "irgof/estimation.hpp"
#include "irgof/khmaladze.hpp"
#include "irgof/nulls.hpp"

namespace irgof {

// --- covariate law ------------------------------------------------------------

/// g1(x) = 1 - (sqrt2/4) cos(2 pi x) - (sqrt2/8) cos(4 pi x) on [0,1].
double g1_pdf(double x);
double g1_cdf(double x);
/// Inverse of g1_cdf to 1e-12 by safeguarded Newton iteration.
double g1_quantile(double u);
Eigen::VectorXd sample_g1(Rng& rng, Eigen::Index n);

// --- regression model ---------------------------------------------------------

enum class Design { NontrivialG, Uniform };
enum class Distortion { Identity, LaplaceProduct };

std::string to_string(Design design);
std::string to_string(Distortion distortion);
Design parse_design(std::string_view name);
Distortion parse_distortion(std::string_view name);

struct FourierTerm {
  Eigen::VectorXi k;
  double value;
};

/// Fourier coefficients of the periodized, normalized product of Laplace
/// densities (mean 1/2, scale 1/10) restricted to [0,1] in each coordinate.
double laplace_product_psi(const Eigen::Ref<const Eigen::VectorXi>& k);

/// ((-1)^|k| - e^-5) / ((1 + 4 pi^2 k^2 / 100)(1 - e^-5)), one coordinate.
double laplace_psi_1d(int k);

struct SyntheticModel {
  int dim = 2;
  /// Theta(k) over a finite support closed under negation.
  std::vector<FourierTerm> theta;
  Distortion distortion = Distortion::LaplaceProduct;
  Design design = Design::Uniform;
  ErrorSampler errors;

  double psi(const Eigen::Ref<const Eigen::VectorXi>& k) const;
};

/// The 13 coefficients of
/// theta = 5 + cos 2pi x1 + 1.5 cos 2pi x2 + 1.5 cos 4pi x1 - 2 cos 4pi x2
///         - 2 cos 2pi(x1 + x2) - 0.5 cos 2pi(x1 - x2).
std::vector<FourierTerm> benchmark_theta();

SyntheticModel benchmark_model(Design design, ErrorSampler errors,
                               Distortion distortion = Distortion::LaplaceProduct);

/// sum_k Psi(k) Theta(k) exp(i 2 pi k.x).
double ktheta_true(const SyntheticModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
/// sum_k Theta(k) exp(i 2 pi k.x).
double theta_true(const SyntheticModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// X from the covariate law, Y = K theta(X) + errors.
Dataset generate(const SyntheticModel& model, Eigen::Index n, Rng& rng);

/// size x size Poisson counts with mean 50 + 8 K theta at the pixel
/// midpoints, for exercising the image workflow.
Eigen::MatrixXd synthetic_poisson_image(const SyntheticModel& model, int size, Rng& rng);

/// Independent stream for (seed, cell, rep).
Rng stream_rng(std::uint64_t seed, std::uint64_t cell, std::uint64_t rep);

// --- analysis pipeline --------------------------------------------------------

struct AnalysisOptions {
  NullPtr null = gaussian_null();
  /// Empty selects default_cv_grid.
  std::vector<double> cv_grid;
  double floor = kDefaultDensityFloor;
  TestOptions test;
  std::size_t threads = 1;
};

struct Analysis {
  std::vector<double> cv_radii;
  std::vector<double> cv_scores;
  double radius = 0.0;
  RegressionFit fit;
  TestReport report;
};

/// Cross-validation, fit and test in one call.
Analysis analyze(const Dataset& data, const AnalysisOptions& options);

// --- power study --------------------------------------------------------------

struct Scenario {
  ErrorSampler errors;
  Design design = Design::Uniform;
  Distortion distortion = Distortion::LaplaceProduct;
};

struct PowerStudyConfig {
  std::vector<Scenario> scenarios;
  std::vector<Eigen::Index> sample_sizes;
  int reps = 200;
  std::uint64_t seed = 20240101;
  AnalysisOptions analysis;
  /// Workers over replications; each analysis runs single-threaded.
  std::size_t threads = 1;
};

struct PowerRow {
  std::string errors;
  std::string design;
  Eigen::Index n = 0;
  int reps = 0;
  int rejections = 0;
  /// Replications that raised an error (degenerate fit, singular Gamma, ...).
  int failures = 0;
  /// rejections / (reps - failures).
  double rate = 0.0;
  /// Wilson 95% interval for the rate.
  double band_low = 0.0;
  double band_high = 0.0;
  std::uint64_t seed = 0;
};

struct PowerTable {
  std::vector<PowerRow> rows;
};

/// Rows ordered by scenario, then sample size. Deterministic for a given
/// config regardless of the worker count.
PowerTable power_study(const PowerStudyConfig& config);

}  // namespace irgof
