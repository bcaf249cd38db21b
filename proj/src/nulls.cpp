#include "irgof/nulls.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "irgof/error.hpp"
#include "irgof/quadrature.hpp"

namespace irgof {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kTinyDensity = 1e-300;

// Acklam's rational approximation to the normal quantile.
double normal_quantile_guess(double p) {
  static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                              -2.759285104469687e+02, 1.383577518672690e+02,
                                              -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                              -1.556989798598866e+02, 6.680131188771972e+01,
                                              -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                              -2.400758277161838e+00, -2.549732539343734e+00,
                                              4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void require_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::Domain, "quantile level must lie in (0,1)");
}

}  // namespace

// --- Gaussian -----------------------------------------------------------------

double GaussianNull::cdf(double t) const { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double GaussianNull::survival(double t) const { return 0.5 * std::erfc(t / std::numbers::sqrt2); }

double GaussianNull::pdf(double t) const { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double GaussianNull::pdf_derivative(double t) const { return -t * pdf(t); }

double GaussianNull::quantile(double p) const {
  require_probability(p);
  double x = normal_quantile_guess(p);
  // Halley refinement; the residual is taken in the thinner tail.
  for (int it = 0; it < 2; ++it) {
    const double e = p < 0.5 ? cdf(x) - p : (1.0 - p) - survival(x);
    const double u = e / pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double GaussianNull::sample(Rng& rng) const { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// --- Logistic -----------------------------------------------------------------

namespace {
constexpr double kLogisticScale = std::numbers::sqrt3 / std::numbers::pi;
}

double LogisticNull::cdf(double t) const { return 1.0 / (1.0 + std::exp(-t / kLogisticScale)); }

double LogisticNull::survival(double t) const { return 1.0 / (1.0 + std::exp(t / kLogisticScale)); }

double LogisticNull::pdf(double t) const {
  const double e = std::exp(-std::abs(t) / kLogisticScale);
  return e / (kLogisticScale * (1.0 + e) * (1.0 + e));
}

double LogisticNull::pdf_derivative(double t) const {
  // f' = f (1 - 2F) / s, with 1 - 2F = tanh(-t / 2s).
  return pdf(t) * std::tanh(-t / (2.0 * kLogisticScale)) / kLogisticScale;
}

double LogisticNull::log_density_slope(double t) const {
  return std::tanh(-t / (2.0 * kLogisticScale)) / kLogisticScale;
}

double LogisticNull::quantile(double p) const {
  require_probability(p);
  return kLogisticScale * (std::log(p) - std::log1p(-p));
}

double LogisticNull::sample(Rng& rng) const {
  double u = 0.0;
  while (u <= 0.0) u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return quantile(u);
}

// --- registry -----------------------------------------------------------------

NullPtr gaussian_null() {
  static const NullPtr instance = std::make_shared<GaussianNull>();
  return instance;
}

std::vector<std::string> null_names() { return {"gaussian", "logistic"}; }

NullPtr make_null(std::string_view name) {
  if (name == "gaussian" || name == "normal") return gaussian_null();
  if (name == "logistic") return std::make_shared<LogisticNull>();
  std::ostringstream msg;
  msg << "unknown null model '" << name << "'; options are:";
  for (const auto& option : null_names()) msg << ' ' << option;
  fail(ErrorKind::Config, msg.str());
}

double NullModel::log_density_slope(double t) const {
  const double f = pdf(t);
  if (!(f >= kTinyDensity)) {
    std::ostringstream msg;
    msg << "null density " << f << " at t = " << t << " is too small to form the score";
    fail(ErrorKind::EvaluationRange, msg.str());
  }
  return pdf_derivative(t) / f;
}

Eigen::Vector3d score_h(const NullModel& null, double t) {
  const double ratio = null.log_density_slope(t);
  return {1.0, -ratio, -1.0 - t * ratio};
}

double fisher_information(const NullModel& null) {
  auto integrand = [&](double t) {
    const double f = null.pdf(t);
    if (f < kTinyDensity) return 0.0;
    const double ratio = null.pdf_derivative(t) / f;
    return (1.0 + t * t) * ratio * ratio * f;
  };
  const quad::Tolerance tol{1e-10, 1e-10, 4000};
  return quad::integrate_from_infinity(integrand, 0.0, tol).value +
         quad::integrate_to_infinity(integrand, 0.0, tol).value;
}

// --- error samplers -----------------------------------------------------------

namespace {

double skew_delta(double alpha) { return alpha / std::sqrt(1.0 + alpha * alpha); }

}  // namespace

std::string ErrorSampler::name() const {
  switch (law) {
    case ErrorLaw::Normal:
      return "normal";
    case ErrorLaw::Laplace:
      return "laplace";
    case ErrorLaw::SkewNormal:
      return "skew-normal";
    case ErrorLaw::StudentT:
      return "student-t";
  }
  return "unknown";
}

double ErrorSampler::draw(Rng& rng) const {
  switch (law) {
    case ErrorLaw::Normal:
      return scale * std::normal_distribution<double>(0.0, 1.0)(rng);
    case ErrorLaw::Laplace: {
      std::exponential_distribution<double> exp1(1.0);
      const double e1 = exp1(rng);
      const double e2 = exp1(rng);
      return scale * (e1 - e2);
    }
    case ErrorLaw::SkewNormal: {
      std::normal_distribution<double> normal(0.0, 1.0);
      const double u = normal(rng);
      const double v = normal(rng);
      const double delta = skew_delta(shape);
      return scale * (delta * std::abs(u) + std::sqrt(1.0 - delta * delta) * v) - mean();
    }
    case ErrorLaw::StudentT:
      return scale * std::student_t_distribution<double>(shape)(rng);
  }
  return 0.0;
}

double ErrorSampler::mean() const {
  // Mean of the uncentered skew-normal; the sampler subtracts it.
  if (law == ErrorLaw::SkewNormal) return scale * skew_delta(shape) * std::sqrt(2.0 / std::numbers::pi);
  return 0.0;
}

double ErrorSampler::population_sd() const {
  switch (law) {
    case ErrorLaw::Normal:
      return scale;
    case ErrorLaw::Laplace:
      return std::numbers::sqrt2 * scale;
    case ErrorLaw::SkewNormal: {
      const double delta = skew_delta(shape);
      return scale * std::sqrt(1.0 - 2.0 * delta * delta / std::numbers::pi);
    }
    case ErrorLaw::StudentT:
      return scale * std::sqrt(shape / (shape - 2.0));
  }
  return 0.0;
}

ErrorSampler normal_errors(double sd) { return {ErrorLaw::Normal, sd, 0.0}; }
ErrorSampler laplace_errors(double scale) { return {ErrorLaw::Laplace, scale, 0.0}; }
ErrorSampler skew_normal_errors(double scale, double alpha) { return {ErrorLaw::SkewNormal, scale, alpha}; }
ErrorSampler student_t_errors(double dof) {
  if (!(dof > 2.0)) fail(ErrorKind::Domain, "Student t errors need more than 2 degrees of freedom");
  return {ErrorLaw::StudentT, 1.0, dof};
}

std::vector<ErrorSampler> alternative_samplers() {
  return {normal_errors(0.5), laplace_errors(0.5), skew_normal_errors(1.0, 3.0), student_t_errors(6.0)};
}

ErrorSampler make_error_sampler(std::string_view name) {
  for (const ErrorSampler& s : alternative_samplers()) {
    if (s.name() == name) return s;
  }
  fail(ErrorKind::Config, "unknown error law '" + std::string(name) +
                              "'; options are: normal laplace skew-normal student-t");
}

}  // namespace irgof
