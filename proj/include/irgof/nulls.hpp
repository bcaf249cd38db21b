#pragma once

// Standardized null error laws F* and the error samplers of the
// simulation study.

#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace irgof {

using Rng = std::mt19937_64;

/// A standardized error law (mean zero, variance one) with a smooth,
/// positive density. Fisher information for location and scale is assumed
/// finite; see fisher_information().
class NullModel {
 public:
  virtual ~NullModel() = default;

  virtual std::string name() const = 0;
  virtual double cdf(double t) const = 0;
  /// 1 - cdf(t), accurate in the upper tail.
  virtual double survival(double t) const { return 1.0 - cdf(t); }
  virtual double pdf(double t) const = 0;
  virtual double pdf_derivative(double t) const = 0;
  virtual double quantile(double p) const = 0;
  virtual double sample(Rng& rng) const = 0;
  /// f'(t) / f(t). The default divides pdf_derivative by pdf and throws
  /// Error(EvaluationRange) once the density underflows below 1e-300.
  virtual double log_density_slope(double t) const;
  /// True when the incomplete information matrix has a closed form.
  virtual bool gaussian() const { return false; }
};

using NullPtr = std::shared_ptr<const NullModel>;

/// Standard normal law.
class GaussianNull final : public NullModel {
 public:
  std::string name() const override { return "gaussian"; }
  double cdf(double t) const override;
  double survival(double t) const override;
  double pdf(double t) const override;
  double pdf_derivative(double t) const override;
  /// Rational approximation refined by Newton steps.
  double quantile(double p) const override;
  double sample(Rng& rng) const override;
  double log_density_slope(double t) const override { return -t; }
  bool gaussian() const override { return true; }
};

/// Logistic law scaled to unit variance.
class LogisticNull final : public NullModel {
 public:
  std::string name() const override { return "logistic"; }
  double cdf(double t) const override;
  double survival(double t) const override;
  double pdf(double t) const override;
  double pdf_derivative(double t) const override;
  double quantile(double p) const override;
  double sample(Rng& rng) const override;
  double log_density_slope(double t) const override;
};

NullPtr gaussian_null();

/// Names accepted by make_null.
std::vector<std::string> null_names();
/// Throws Error(Config) listing the options for unknown names.
NullPtr make_null(std::string_view name);

/// h(t) = (1, -f'/f, -(t f)'/f) = (1, -f'/f, -1 - t f'/f).
Eigen::Vector3d score_h(const NullModel& null, double t);

/// Location-scale Fisher information integral int (1 + t^2)(f'/f)^2 dF by
/// quadrature. Diagnostic only.
double fisher_information(const NullModel& null);

// ---------------------------------------------------------------------------

enum class ErrorLaw { Normal, Laplace, SkewNormal, StudentT };

/// Draws i.i.d. regression errors. `scale` is the normal sd, the Laplace
/// scale or the skew-normal scale; `shape` is the skew parameter alpha or
/// the t degrees of freedom.
struct ErrorSampler {
  ErrorLaw law = ErrorLaw::Normal;
  double scale = 1.0;
  double shape = 0.0;

  std::string name() const;
  double draw(Rng& rng) const;
  double mean() const;
  double population_sd() const;
};

ErrorSampler normal_errors(double sd);
ErrorSampler laplace_errors(double scale);
/// Centered skew-normal: omega (delta |U| + sqrt(1 - delta^2) V) minus its mean.
ErrorSampler skew_normal_errors(double scale, double alpha);
ErrorSampler student_t_errors(double dof);

/// Normal(sd 1/2), Laplace(1/2), centered skew-normal(1, 3), Student t(6).
std::vector<ErrorSampler> alternative_samplers();

/// Looks up "normal", "laplace", "skew-normal" or "student-t" with the
/// simulation-study parameters.
ErrorSampler make_error_sampler(std::string_view name);

}  // namespace irgof
