#include "irgof/khmaladze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "irgof/error.hpp"
#include "irgof/quadrature.hpp"

namespace irgof {

namespace {

constexpr double kTinyDensity = 1e-300;

// h(u) h(u)^T f(u), zero once the density has underflowed.
Eigen::Matrix3d information_density(const NullModel& null, double u) {
  const double f = null.pdf(u);
  if (!(f >= kTinyDensity) || !std::isfinite(u)) return Eigen::Matrix3d::Zero();
  const Eigen::Vector3d h = score_h(null, u);
  return h * h.transpose() * f;
}

Eigen::Matrix3d symmetrized(const Eigen::Matrix3d& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Eigen::Matrix3d gamma_quadrature(const NullModel& null, double t, double tolerance) {
  auto integrand = [&](double u) -> Eigen::Matrix3d { return information_density(null, u); };
  const quad::Tolerance tol{tolerance, 1e-12, 4000};
  try {
    // The semi-infinite map can step over the bulk when t is far out in the
    // lower tail, so the finite part is split at fixed breakpoints.
    Eigen::Matrix3d total = Eigen::Matrix3d::Zero();
    double a = t;
    for (double b : {-16.0, -8.0, -4.0, -2.0, 0.0}) {
      if (b <= a) continue;
      total += quad::integrate(integrand, a, b, tol).value;
      a = b;
    }
    total += quad::integrate_to_infinity(integrand, a, tol).value;
    return symmetrized(total);
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << "incomplete information matrix at t = " << t << " for null '" << null.name()
        << "': " << e.what();
    fail(ErrorKind::Numerical, msg.str());
  }
}

// ---------------------------------------------------------------------------

GammaProvider::GammaProvider(NullPtr null)
    : GammaProvider(null, null && null->gaussian() ? GammaMode::GaussianClosedForm
                                                   : GammaMode::Quadrature) {}

GammaProvider::GammaProvider(NullPtr null, GammaMode mode) : null_(std::move(null)), mode_(mode) {
  if (!null_) fail(ErrorKind::Config, "no null model supplied");
  if (mode_ == GammaMode::GaussianClosedForm && !null_->gaussian()) {
    fail(ErrorKind::Config, "closed-form information matrix is only available for the Gaussian null");
  }
}

Eigen::Matrix3d GammaProvider::operator()(double t) const {
  if (mode_ == GammaMode::GaussianClosedForm) return gamma_closed_form_gaussian(t);
  return gamma_quadrature(*null_, t);
}

std::vector<Eigen::Matrix3d> GammaProvider::on_grid(std::span<const double> grid) const {
  std::vector<Eigen::Matrix3d> out(grid.size());
  if (grid.empty()) return out;
  if (mode_ == GammaMode::GaussianClosedForm) {
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = gamma_closed_form_gaussian(grid[i]);
    return out;
  }
  auto integrand = [&](double u) -> Eigen::Matrix3d { return information_density(*null_, u); };
  const quad::Tolerance tol{1e-13, 1e-12, 200};
  out.back() = gamma_quadrature(*null_, grid.back());
  for (std::size_t i = grid.size() - 1; i-- > 0;) {
    out[i] = out[i + 1] + symmetrized(quad::integrate(integrand, grid[i], grid[i + 1], tol).value);
  }
  return out;
}

// ---------------------------------------------------------------------------

ScanFunction::ScanFunction(Eigen::VectorXd grid, Values values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.size() < 2 || values_.rows() != grid_.size()) {
    fail(ErrorKind::Domain, "scan function needs at least two grid points with matching values");
  }
  step_ = (grid_[grid_.size() - 1] - grid_[0]) / static_cast<double>(grid_.size() - 1);
}

Eigen::RowVector3d ScanFunction::operator()(double t) const {
  const Eigen::Index last = grid_.size() - 1;
  if (t <= grid_[0]) return Eigen::RowVector3d::Zero();
  if (t >= grid_[last]) return values_.row(last);
  auto i = static_cast<Eigen::Index>((t - grid_[0]) / step_);
  i = std::clamp<Eigen::Index>(i, 0, last - 1);
  // The uniform-step guess can be one cell off through rounding.
  if (t < grid_[i]) --i;
  else if (t > grid_[i + 1]) ++i;
  const double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return (1.0 - w) * values_.row(i) + w * values_.row(i + 1);
}

ScanFunction build_scan(const NullModel& null, const GammaProvider& gamma, double t0,
                        const ScanOptions& options) {
  if (!std::isfinite(t0)) fail(ErrorKind::Domain, "scan upper end t0 must be finite");
  if (options.grid_size < 2) fail(ErrorKind::Config, "scan grid needs at least two points");
  const double lower = null.quantile(options.lower_tail);
  if (!(t0 > lower)) {
    std::ostringstream msg;
    msg << "scan upper end t0 = " << t0 << " does not exceed the scan start " << lower;
    fail(ErrorKind::Domain, msg.str());
  }
  const Eigen::Index N = options.grid_size;
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(N, lower, t0);
  const std::vector<Eigen::Matrix3d> gammas =
      gamma.on_grid(std::span<const double>(grid.data(), static_cast<std::size_t>(N)));

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> integrand(N, 3);
  for (Eigen::Index i = 0; i < N; ++i) {
    eig.compute(gammas[static_cast<std::size_t>(i)]);
    const Eigen::Vector3d lambda = eig.eigenvalues();
    const double condition = lambda[2] / lambda[0];
    if (!(lambda[0] > 0.0) || !(condition <= options.max_condition)) {
      std::ostringstream msg;
      msg << "incomplete information matrix is singular at t = " << grid[i]
          << " (condition number " << condition << ")";
      fail(ErrorKind::Singularity, msg.str());
    }
    const Eigen::Matrix3d& V = eig.eigenvectors();
    const Eigen::Vector3d solved =
        V * (V.transpose() * score_h(null, grid[i])).cwiseQuotient(lambda);
    integrand.row(i) = solved.transpose() * null.pdf(grid[i]);
  }

  // Cumulative trapezoid sums with the Euler-Maclaurin end correction
  // -dx^2/12 (f'(t_i) - f'(t_lo)); f' from second-order differences.
  const double dx = grid[1] - grid[0];
  ScanFunction::Values slope(N, 3);
  if (N >= 3) {
    slope.row(0) = (-3.0 * integrand.row(0) + 4.0 * integrand.row(1) - integrand.row(2)) / (2.0 * dx);
    slope.row(N - 1) =
        (3.0 * integrand.row(N - 1) - 4.0 * integrand.row(N - 2) + integrand.row(N - 3)) / (2.0 * dx);
    for (Eigen::Index i = 1; i + 1 < N; ++i) slope.row(i) = (integrand.row(i + 1) - integrand.row(i - 1)) / (2.0 * dx);
  } else {
    slope.setZero();
  }
  ScanFunction::Values values(N, 3);
  values.row(0).setZero();
  Eigen::RowVector3d trapezoid = Eigen::RowVector3d::Zero();
  for (Eigen::Index i = 1; i < N; ++i) {
    trapezoid += 0.5 * dx * (integrand.row(i - 1) + integrand.row(i));
    values.row(i) = trapezoid - dx * dx / 12.0 * (slope.row(i) - slope.row(0));
  }
  return ScanFunction(std::move(grid), std::move(values));
}

// ---------------------------------------------------------------------------

ProcessTrace transform(const StandardizedResiduals& residuals, const NullModel& null,
                       const GammaProvider& gamma, const TestOptions& options) {
  const Eigen::Index n = residuals.size();
  if (n < 10) fail(ErrorKind::InsufficientData, "the transformed process needs at least 10 residuals");
  const std::vector<double>& z = residuals.sorted();
  const double t0 = residuals.order_statistic(options.t0_level);
  const ScanFunction scan = build_scan(null, gamma, t0, options.scan);

  // prefix[i] = sum_{j<i} G0(Z_(j)) h(Z_(j)) over order statistics <= t0;
  // suffix[i] = sum_{j>=i} h(Z_(j)).
  const auto nz = static_cast<std::size_t>(n);
  std::vector<Eigen::Vector3d> h(nz);
  for (std::size_t j = 0; j < nz; ++j) h[j] = score_h(null, z[j]);
  std::vector<double> prefix(nz + 1, 0.0);
  for (std::size_t j = 0; j < nz; ++j) {
    const double term = z[j] <= t0 ? scan(z[j]).dot(h[j].transpose()) : 0.0;
    prefix[j + 1] = prefix[j] + term;
  }
  std::vector<Eigen::Vector3d> suffix(nz + 1, Eigen::Vector3d::Zero());
  for (std::size_t j = nz; j-- > 0;) suffix[j] = suffix[j + 1] + h[j];

  const double rn = std::sqrt(static_cast<double>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  auto compensator = [&](double t, std::size_t at_or_below) {
    return inv_n * (prefix[at_or_below] + scan(t).dot(suffix[at_or_below].transpose()));
  };

  ProcessTrace trace;
  trace.t0 = t0;
  trace.n = n;
  trace.ecdf_t0 = residuals.ecdf(t0);

  const Eigen::VectorXd& grid = scan.grid();
  std::size_t g = 0;
  std::size_t j = 0;
  // A grid point landing on a jump already listed adds nothing.
  double last_jump = -std::numeric_limits<double>::infinity();
  while (j < nz && z[j] <= t0) {
    // Grid points strictly below the next jump.
    for (; g < static_cast<std::size_t>(grid.size()) && grid[static_cast<Eigen::Index>(g)] < z[j]; ++g) {
      const double t = grid[static_cast<Eigen::Index>(g)];
      if (t == last_jump) continue;
      const auto below = static_cast<std::size_t>(std::upper_bound(z.begin(), z.end(), t) - z.begin());
      trace.eval_points.push_back(t);
      trace.values.push_back(rn * (static_cast<double>(below) * inv_n - compensator(t, below)));
    }
    const double t = z[j];
    const std::size_t strictly_below = j;
    std::size_t at_or_below = j;
    while (at_or_below < nz && z[at_or_below] == t) ++at_or_below;
    const double c = compensator(t, at_or_below);
    trace.eval_points.push_back(t);
    trace.values.push_back(rn * (static_cast<double>(strictly_below) * inv_n - c));
    trace.eval_points.push_back(t);
    trace.values.push_back(rn * (static_cast<double>(at_or_below) * inv_n - c));
    j = at_or_below;
    last_jump = t;
  }
  for (; g < static_cast<std::size_t>(grid.size()); ++g) {
    const double t = grid[static_cast<Eigen::Index>(g)];
    if (t > t0) break;
    if (t == last_jump) continue;
    const auto below = static_cast<std::size_t>(std::upper_bound(z.begin(), z.end(), t) - z.begin());
    trace.eval_points.push_back(t);
    trace.values.push_back(rn * (static_cast<double>(below) * inv_n - compensator(t, below)));
  }
  return trace;
}

ProcessTrace transform(const RegressionFit& fit, const NullModel& null, const GammaProvider& gamma,
                       const TestOptions& options) {
  return transform(fit.residuals(), null, gamma, options);
}

double statistic(std::span<const double> values, double ecdf_t0) {
  if (values.empty()) fail(ErrorKind::InsufficientData, "empty process trace");
  if (!(ecdf_t0 > 0.0)) fail(ErrorKind::Domain, "F(t0) must be positive");
  double sup = 0.0;
  for (double v : values) sup = std::max(sup, std::abs(v));
  return sup / std::sqrt(ecdf_t0);
}

double statistic(const ProcessTrace& trace) { return statistic(trace.values, trace.ecdf_t0); }

// ---------------------------------------------------------------------------

double brownian_sup_tail(double q) {
  if (!(q > 0.0)) return 1.0;
  const double scale = std::numbers::pi * std::numbers::pi / (8.0 * q * q);
  double sum = 0.0;
  for (int k = 0;; ++k) {
    const double odd = 2.0 * k + 1.0;
    const double term = std::exp(-odd * odd * scale) / odd;
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-14) break;
  }
  return 1.0 - 4.0 / std::numbers::pi * sum;
}

double brownian_sup_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::Domain, "alpha must lie in (0,1)");
  double lo = 1e-6;
  double hi = 10.0;
  // The tail is decreasing in q.
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (brownian_sup_tail(mid) > alpha) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double ks_distance(const StandardizedResiduals& residuals, const NullModel& null) {
  const std::vector<double>& z = residuals.sorted();
  const auto n = static_cast<double>(z.size());
  double sup = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double f = null.cdf(z[j]);
    sup = std::max({sup, std::abs(static_cast<double>(j + 1) / n - f), std::abs(f - static_cast<double>(j) / n)});
  }
  return sup;
}

// ---------------------------------------------------------------------------

bool rejects(double statistic, double alpha) { return statistic > brownian_sup_quantile(alpha); }

TestReport decide(const StandardizedResiduals& residuals, const NullPtr& null,
                  const TestOptions& options) {
  if (!null) fail(ErrorKind::Config, "no null model supplied");
  const double q = brownian_sup_quantile(options.alpha);
  const GammaProvider gamma(null);
  TestReport report;
  try {
    report.trace = transform(residuals, *null, gamma, options);
  } catch (const Error& e) {
    fail(e.kind(), std::string("martingale transform failed: ") + e.what());
  }
  report.statistic = statistic(report.trace);
  report.t0 = report.trace.t0;
  report.ecdf_t0 = report.trace.ecdf_t0;
  report.alpha = options.alpha;
  report.q_alpha = q;
  report.reject = report.statistic > q;
  report.sigma_hat = residuals.sigma();
  report.n = residuals.size();
  report.ks_distance = ks_distance(residuals, *null);
  return report;
}

TestReport decide(const RegressionFit& fit, const NullPtr& null, double alpha, TestOptions options) {
  options.alpha = alpha;
  return decide(fit.residuals(), null, options);
}

}  // namespace irgof
