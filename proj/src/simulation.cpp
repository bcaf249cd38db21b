#include "irgof/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "irgof/bandwidth.hpp"
#include "irgof/error.hpp"
#include "irgof/parallel.hpp"

namespace irgof {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// --- covariate law ------------------------------------------------------------

double g1_pdf(double x) {
  return 1.0 - std::numbers::sqrt2 / 4.0 * std::cos(kTwoPi * x) -
         std::numbers::sqrt2 / 8.0 * std::cos(2.0 * kTwoPi * x);
}

double g1_cdf(double x) {
  return x - std::numbers::sqrt2 / (8.0 * std::numbers::pi) * std::sin(kTwoPi * x) -
         std::numbers::sqrt2 / (32.0 * std::numbers::pi) * std::sin(2.0 * kTwoPi * x);
}

double g1_quantile(double u) {
  if (!(u >= 0.0 && u <= 1.0)) fail(ErrorKind::Domain, "g1 quantile level must lie in [0,1]");
  if (u == 0.0 || u == 1.0) return u;
  double lo = 0.0;
  double hi = 1.0;
  double x = u;
  for (int it = 0; it < 100; ++it) {
    const double r = g1_cdf(x) - u;
    if (std::abs(r) < 1e-14) break;
    if (r > 0.0) hi = x;
    else lo = x;
    double next = x - r / g1_pdf(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-15) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

Eigen::VectorXd sample_g1(Rng& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) out[j] = g1_quantile(uniform(rng));
  return out;
}

// --- model --------------------------------------------------------------------

std::string to_string(Design design) {
  return design == Design::Uniform ? "uniform" : "nontrivial-g";
}

std::string to_string(Distortion distortion) {
  return distortion == Distortion::Identity ? "identity" : "laplace-product";
}

Design parse_design(std::string_view name) {
  if (name == "uniform") return Design::Uniform;
  if (name == "nontrivial-g" || name == "g1") return Design::NontrivialG;
  fail(ErrorKind::Config, "unknown design '" + std::string(name) + "'; options are: uniform nontrivial-g");
}

Distortion parse_distortion(std::string_view name) {
  if (name == "identity") return Distortion::Identity;
  if (name == "laplace-product") return Distortion::LaplaceProduct;
  fail(ErrorKind::Config,
       "unknown distortion '" + std::string(name) + "'; options are: identity laplace-product");
}

double laplace_psi_1d(int k) {
  const double e5 = std::exp(-5.0);
  const double sign = (std::abs(k) % 2 == 0) ? 1.0 : -1.0;
  const double kk = static_cast<double>(k);
  return (sign - e5) / ((1.0 + 4.0 * std::numbers::pi * std::numbers::pi * kk * kk / 100.0) * (1.0 - e5));
}

double laplace_product_psi(const Eigen::Ref<const Eigen::VectorXi>& k) {
  double out = 1.0;
  for (Eigen::Index l = 0; l < k.size(); ++l) out *= laplace_psi_1d(k[l]);
  return out;
}

double SyntheticModel::psi(const Eigen::Ref<const Eigen::VectorXi>& k) const {
  return distortion == Distortion::Identity ? 1.0 : laplace_product_psi(k);
}

std::vector<FourierTerm> benchmark_theta() {
  std::vector<FourierTerm> terms;
  auto add_cos = [&](int k1, int k2, double amplitude) {
    terms.push_back({Eigen::Vector2i(k1, k2), 0.5 * amplitude});
    terms.push_back({Eigen::Vector2i(-k1, -k2), 0.5 * amplitude});
  };
  terms.push_back({Eigen::Vector2i(0, 0), 5.0});
  add_cos(1, 0, 1.0);
  add_cos(0, 1, 1.5);
  add_cos(2, 0, 1.5);
  add_cos(0, 2, -2.0);
  add_cos(1, 1, -2.0);
  add_cos(1, -1, -0.5);
  return terms;
}

SyntheticModel benchmark_model(Design design, ErrorSampler errors, Distortion distortion) {
  SyntheticModel model;
  model.dim = 2;
  model.theta = benchmark_theta();
  model.distortion = distortion;
  model.design = design;
  model.errors = errors;
  return model;
}

namespace {

double fourier_sum(const SyntheticModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, bool distorted) {
  double sum = 0.0;
  for (const FourierTerm& term : model.theta) {
    const double phase = kTwoPi * term.k.cast<double>().dot(x);
    const double coeff = distorted ? model.psi(term.k) * term.value : term.value;
    // Theta and Psi are real and even, so the sine parts cancel in pairs.
    sum += coeff * std::cos(phase);
  }
  return sum;
}

}  // namespace

double ktheta_true(const SyntheticModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return fourier_sum(model, x, true);
}

double theta_true(const SyntheticModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return fourier_sum(model, x, false);
}

Dataset generate(const SyntheticModel& model, Eigen::Index n, Rng& rng) {
  if (n < 1) fail(ErrorKind::Domain, "sample size must be positive");
  Dataset data;
  data.X.resize(n, model.dim);
  data.Y.resize(n);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int l = 0; l < model.dim; ++l) {
      data.X(j, l) = model.design == Design::Uniform ? uniform(rng) : g1_quantile(uniform(rng));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    data.Y[j] = ktheta_true(model, data.X.row(j).transpose()) + model.errors.draw(rng);
  }
  return data;
}

Eigen::MatrixXd synthetic_poisson_image(const SyntheticModel& model, int size, Rng& rng) {
  Eigen::MatrixXd image(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const Eigen::Vector2d x((i + 0.5) / size, (j + 0.5) / size);
      const double mean = 50.0 + 8.0 * ktheta_true(model, x);
      image(i, j) = static_cast<double>(std::poisson_distribution<int>(std::max(mean, 1.0))(rng));
    }
  }
  return image;
}

Rng stream_rng(std::uint64_t seed, std::uint64_t cell, std::uint64_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(rep)};
  return Rng(seq);
}

// --- pipeline -----------------------------------------------------------------

Analysis analyze(const Dataset& data, const AnalysisOptions& options) {
  const std::vector<double> grid =
      options.cv_grid.empty() ? default_cv_grid(data.size(), data.dim()) : options.cv_grid;
  const CvReport cv = cv_select(data, grid, options.floor, options.threads);
  RegressionFit fitted = fit(data, enumerate_lattice(data.dim(), cv.chosen), options.floor);
  TestReport report = decide(fitted.residuals(), options.null, options.test);
  Analysis out{{}, {}, cv.chosen, std::move(fitted), std::move(report)};
  for (const CvCandidate& c : cv.candidates) {
    out.cv_radii.push_back(c.radius);
    out.cv_scores.push_back(c.score);
  }
  return out;
}

// --- power study --------------------------------------------------------------

namespace {

void wilson_band(int successes, int trials, double& low, double& high) {
  if (trials <= 0) {
    low = 0.0;
    high = 1.0;
    return;
  }
  constexpr double z = 1.959963984540054;
  const double n = trials;
  const double p = successes / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  low = std::max(0.0, center - half);
  high = std::min(1.0, center + half);
}

}  // namespace

PowerTable power_study(const PowerStudyConfig& config) {
  if (config.reps < 1) fail(ErrorKind::Config, "power study needs at least one replication");
  if (config.scenarios.empty() || config.sample_sizes.empty()) {
    fail(ErrorKind::Config, "power study needs at least one scenario and one sample size");
  }
  const std::size_t cells = config.scenarios.size() * config.sample_sizes.size();
  const auto reps = static_cast<std::size_t>(config.reps);
  // 1 = reject, 0 = accept, -1 = failure
  std::vector<int> outcome(cells * reps, 0);

  AnalysisOptions analysis = config.analysis;
  analysis.threads = 1;

  parallel_for(cells * reps, config.threads, [&](std::size_t task) {
    const std::size_t cell = task / reps;
    const std::size_t rep = task % reps;
    const Scenario& scenario = config.scenarios[cell / config.sample_sizes.size()];
    const Eigen::Index n = config.sample_sizes[cell % config.sample_sizes.size()];
    const SyntheticModel model = benchmark_model(scenario.design, scenario.errors, scenario.distortion);
    Rng rng = stream_rng(config.seed, cell, rep);
    try {
      const Dataset data = generate(model, n, rng);
      outcome[task] = analyze(data, analysis).report.reject ? 1 : 0;
    } catch (const Error&) {
      outcome[task] = -1;
    }
  });

  PowerTable table;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const Scenario& scenario = config.scenarios[cell / config.sample_sizes.size()];
    PowerRow row;
    row.errors = scenario.errors.name();
    row.design = to_string(scenario.design);
    row.n = config.sample_sizes[cell % config.sample_sizes.size()];
    row.reps = config.reps;
    row.seed = config.seed;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const int o = outcome[cell * reps + rep];
      if (o < 0) ++row.failures;
      else row.rejections += o;
    }
    const int valid = row.reps - row.failures;
    row.rate = valid > 0 ? static_cast<double>(row.rejections) / valid : 0.0;
    wilson_band(row.rejections, valid, row.band_low, row.band_high);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace irgof
