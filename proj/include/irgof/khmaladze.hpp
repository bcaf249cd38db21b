#pragma once

// Martingale-transformed empirical process of standardized residuals and
// the asymptotically distribution-free supremum test built on it.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "irgof/estimation.hpp"
#include "irgof/nulls.hpp"

namespace irgof {

/// Incomplete information matrix Gamma(t) = int_t^inf h h^T dPhi of the
/// standard normal law, in closed form.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> gamma_closed_form_gaussian(Scalar t) {
  using std::erfc;
  using std::exp;
  using std::isinf;
  const Scalar inv_sqrt2 = Scalar(1) / std::numbers::sqrt2_v<Scalar>;
  const Scalar tail = Scalar(0.5) * erfc(t * inv_sqrt2);
  // t * phi(t) and friends vanish in both limits; avoid inf * 0.
  const Scalar phi = isinf(t) ? Scalar(0)
                              : std::numbers::inv_sqrtpi_v<Scalar> * inv_sqrt2 * exp(-t * t / Scalar(2));
  const Scalar tphi = isinf(t) ? Scalar(0) : t * phi;
  const Scalar t2phi = isinf(t) ? Scalar(0) : (t * t + Scalar(1)) * phi;
  const Scalar t3phi = isinf(t) ? Scalar(0) : (t * t * t + t) * phi;
  Eigen::Matrix<Scalar, 3, 3> g;
  g << tail, phi, tphi,
       phi, tail + tphi, t2phi,
       tphi, t2phi, Scalar(2) * tail + t3phi;
  return g;
}

/// Gamma(t) for any null law by adaptive quadrature (absolute tolerance
/// `tolerance` per entry), symmetrized.
Eigen::Matrix3d gamma_quadrature(const NullModel& null, double t, double tolerance = 1e-11);

enum class GammaMode { GaussianClosedForm, Quadrature };

/// Evaluates Gamma(t) for a null law: closed form for the Gaussian,
/// quadrature otherwise.
class GammaProvider {
 public:
  explicit GammaProvider(NullPtr null);
  GammaProvider(NullPtr null, GammaMode mode);

  GammaMode mode() const { return mode_; }
  const NullModel& null() const { return *null_; }

  Eigen::Matrix3d operator()(double t) const;

  /// Gamma at every point of an ascending grid. In quadrature mode the tail
  /// integral is taken once at the top and accumulated downward.
  std::vector<Eigen::Matrix3d> on_grid(std::span<const double> grid) const;

 private:
  NullPtr null_;
  GammaMode mode_;
};

struct ScanOptions {
  Eigen::Index grid_size = 4096;
  /// The scan starts at the null quantile of this level.
  double lower_tail = 1e-6;
  /// Largest admissible condition number of Gamma on the grid.
  double max_condition = 1e12;
};

/// G0(t) = int_{t_lo}^t h^T(y) Gamma^{-1}(y) dF*(y) tabulated on a uniform
/// grid from t_lo to t0 and read back by linear interpolation.
class ScanFunction {
 public:
  using Values = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

  ScanFunction(Eigen::VectorXd grid, Values values);

  double lower() const { return grid_[0]; }
  double upper() const { return grid_[grid_.size() - 1]; }
  const Eigen::VectorXd& grid() const { return grid_; }
  const Values& values() const { return values_; }

  /// Zero below the grid, clamped to the last value above it.
  Eigen::RowVector3d operator()(double t) const;

 private:
  Eigen::VectorXd grid_;
  Values values_;
  double step_;
};

/// Throws Error(Singularity) naming t when Gamma(t) is ill-conditioned on
/// the grid.
ScanFunction build_scan(const NullModel& null, const GammaProvider& gamma, double t0,
                        const ScanOptions& options = {});

/// xi(t) at the residual order statistics up to t0 (each with its left
/// limit, listed first) and at the scan grid points, in ascending order.
struct ProcessTrace {
  std::vector<double> eval_points;
  std::vector<double> values;
  double t0 = 0.0;
  double ecdf_t0 = 0.0;
  Eigen::Index n = 0;
};

struct TestOptions {
  double alpha = 0.05;
  /// t0 is the ceil(level n)-th order statistic of the standardized residuals.
  double t0_level = 0.99;
  ScanOptions scan;
};

/// xi(t) = sqrt(n) { F(t) - (1/n) sum_j G0(min(t, Z_j)) h(Z_j) } for t <= t0.
/// Requires n >= 10.
ProcessTrace transform(const StandardizedResiduals& residuals, const NullModel& null,
                       const GammaProvider& gamma, const TestOptions& options = {});
ProcessTrace transform(const RegressionFit& fit, const NullModel& null, const GammaProvider& gamma,
                       const TestOptions& options = {});

/// max |xi| / sqrt(F(t0)).
double statistic(std::span<const double> values, double ecdf_t0);
double statistic(const ProcessTrace& trace);

/// P(sup_{0<=s<=1} |B(s)| > q).
double brownian_sup_tail(double q);
/// Upper alpha-quantile of sup |B| on [0,1], by bisection on the tail series.
double brownian_sup_quantile(double alpha);

/// T0 > q_alpha.
bool rejects(double statistic, double alpha);

/// sup_t |F(t) - F*(t)|. Reported as a diagnostic; it has no calibrated
/// critical values here.
double ks_distance(const StandardizedResiduals& residuals, const NullModel& null);

struct TestReport {
  double statistic = 0.0;
  double t0 = 0.0;
  double ecdf_t0 = 0.0;
  double alpha = 0.0;
  double q_alpha = 0.0;
  bool reject = false;
  double sigma_hat = 0.0;
  Eigen::Index n = 0;
  double ks_distance = 0.0;
  ProcessTrace trace;
};

TestReport decide(const StandardizedResiduals& residuals, const NullPtr& null,
                  const TestOptions& options = {});
TestReport decide(const RegressionFit& fit, const NullPtr& null, double alpha,
                  TestOptions options = {});

}  // namespace irgof
