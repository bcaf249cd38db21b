#include "irgof/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "irgof/error.hpp"

namespace irgof {

Dataset Dataset::without(Eigen::Index j) const {
  const Eigen::Index n = size();
  Dataset out;
  out.X.resize(n - 1, X.cols());
  out.Y.resize(n - 1);
  out.X.topRows(j) = X.topRows(j);
  out.X.bottomRows(n - 1 - j) = X.bottomRows(n - 1 - j);
  out.Y.head(j) = Y.head(j);
  out.Y.tail(n - 1 - j) = Y.tail(n - 1 - j);
  return out;
}

Dataset make_dataset(Eigen::MatrixXd X, Eigen::VectorXd Y) {
  if (X.rows() != Y.size()) {
    fail(ErrorKind::Domain, "covariate rows and responses differ in length");
  }
  if (X.cols() < 1) fail(ErrorKind::Domain, "covariates need at least one dimension");
  if (Y.size() < 1) fail(ErrorKind::InsufficientData, "dataset has no observations");
  for (Eigen::Index j = 0; j < Y.size(); ++j) {
    if (!std::isfinite(Y[j])) {
      fail(ErrorKind::Range, "non-finite response in row " + std::to_string(j + 1));
    }
    for (Eigen::Index l = 0; l < X.cols(); ++l) {
      const double v = X(j, l);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        std::ostringstream msg;
        msg << "covariate x" << (l + 1) << " = " << v << " in row " << (j + 1)
            << " lies outside [0,1]";
        fail(ErrorKind::Range, msg.str());
      }
    }
  }
  return Dataset{std::move(X), std::move(Y)};
}

// ---------------------------------------------------------------------------

DensityEstimate::DensityEstimate(FreqLattice lattice, Eigen::VectorXcd coeffs, double floor)
    : lattice_(std::move(lattice)), coeffs_(std::move(coeffs)), floor_(floor) {
  if (!(floor_ > 0.0)) fail(ErrorKind::Domain, "density floor must be positive");
}

double DensityEstimate::raw(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  PhaseTable phases(lattice_.dim(), lattice_.max_abs_component());
  phases.assign(x);
  const IndexMatrix& k = lattice_.indices();
  const Eigen::VectorXd& w = lattice_.weights();
  double sum = 0.0;
  for (Eigen::Index r = 0; r < lattice_.size(); ++r) {
    sum += w[r] * (coeffs_[r] * phases.phase(k.row(r).data())).real();
  }
  return sum;
}

double DensityEstimate::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::max(raw(x), floor_);
}

double DensityEstimate::integral() const {
  const Eigen::Index z = lattice_.zero_row();
  return lattice_.weights()[z] * coeffs_[z].real();
}

namespace {

// mean over j of a_j exp(-i 2 pi k.X_j) for every lattice row k.
Eigen::VectorXcd empirical_coeffs(const Eigen::MatrixXd& X, const Eigen::VectorXd& a,
                                  const FreqLattice& lattice) {
  const IndexMatrix& k = lattice.indices();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(lattice.size());
  PhaseTable phases(lattice.dim(), lattice.max_abs_component());
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    phases.assign(X.row(j).transpose());
    for (Eigen::Index r = 0; r < lattice.size(); ++r) {
      out[r] += a[j] * std::conj(phases.phase(k.row(r).data()));
    }
  }
  out /= static_cast<double>(X.rows());
  // Exact conjugate symmetry for real data.
  const auto& neg = lattice.negation();
  for (Eigen::Index r = 0; r < lattice.size(); ++r) {
    const Eigen::Index s = neg[static_cast<std::size_t>(r)];
    if (s > r) {
      const std::complex<double> avg = 0.5 * (out[r] + std::conj(out[s]));
      out[r] = avg;
      out[s] = std::conj(avg);
    } else if (s == r) {
      out[r] = out[r].real();
    }
  }
  return out;
}

void check_dims(const Dataset& data, const FreqLattice& lattice) {
  if (data.dim() != lattice.dim()) {
    fail(ErrorKind::Domain, "lattice dimension does not match the covariate dimension");
  }
}

}  // namespace

DensityEstimate estimate_density(const Dataset& data, const FreqLattice& lattice, double floor) {
  check_dims(data, lattice);
  Eigen::VectorXcd coeffs = empirical_coeffs(data.X, Eigen::VectorXd::Ones(data.size()), lattice);
  coeffs[lattice.zero_row()] = 1.0;
  return DensityEstimate(lattice, std::move(coeffs), floor);
}

Eigen::VectorXcd estimate_coeffs(const Dataset& data, const DensityEstimate& density,
                                 const FreqLattice& lattice) {
  check_dims(data, lattice);
  Eigen::VectorXd a(data.size());
  for (Eigen::Index j = 0; j < data.size(); ++j) a[j] = data.Y[j] / density(data.X.row(j).transpose());
  return empirical_coeffs(data.X, a, lattice);
}

// ---------------------------------------------------------------------------

StandardizedResiduals::StandardizedResiduals(Eigen::VectorXd residuals)
    : residuals_(std::move(residuals)) {
  const Eigen::Index n = residuals_.size();
  if (n == 0) fail(ErrorKind::InsufficientData, "no residuals");
  sigma_ = std::sqrt(residuals_.squaredNorm() / static_cast<double>(n));
  if (!(sigma_ > 0.0)) {
    fail(ErrorKind::DegenerateFit, "all residuals are zero; the scale estimate vanishes");
  }
  standardized_ = residuals_ / sigma_;
  sorted_.assign(standardized_.begin(), standardized_.end());
  std::stable_sort(sorted_.begin(), sorted_.end());
}

double StandardizedResiduals::ecdf(double t) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double StandardizedResiduals::order_statistic(double p) const {
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorKind::Domain, "order statistic level must lie in (0,1]");
  const auto n = static_cast<double>(sorted_.size());
  // Guard against p n landing a rounding error above an integer.
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted_.size());
  return sorted_[rank - 1];
}

// ---------------------------------------------------------------------------

RegressionFit::RegressionFit(FreqLattice lattice, DensityEstimate density, Eigen::VectorXcd coeffs,
                             Eigen::MatrixXd X, Eigen::VectorXd response_weights,
                             Eigen::VectorXd fitted, StandardizedResiduals residuals,
                             Eigen::Index clamped)
    : lattice_(std::move(lattice)),
      density_(std::move(density)),
      coeffs_(std::move(coeffs)),
      X_(std::move(X)),
      response_weights_(std::move(response_weights)),
      fitted_(std::move(fitted)),
      residuals_(std::move(residuals)),
      clamped_(clamped) {}

std::complex<double> RegressionFit::evaluate_complex(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  PhaseTable phases(lattice_.dim(), lattice_.max_abs_component());
  phases.assign(x);
  const IndexMatrix& k = lattice_.indices();
  const Eigen::VectorXd& w = lattice_.weights();
  std::complex<double> sum = 0.0;
  for (Eigen::Index r = 0; r < lattice_.size(); ++r) {
    sum += w[r] * coeffs_[r] * phases.phase(k.row(r).data());
  }
  return sum;
}

double RegressionFit::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return evaluate_complex(x).real();
}

double RegressionFit::evaluate_direct(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < X_.rows(); ++j) {
    sum += response_weights_[j] * smoothing_weight(lattice_, x - X_.row(j).transpose());
  }
  return sum / static_cast<double>(X_.rows());
}

RegressionFit fit(const Dataset& data, const FreqLattice& lattice, double floor) {
  check_dims(data, lattice);
  if (!lattice.kernel().radially_symmetric()) {
    fail(ErrorKind::Domain, "the regression fit requires a radially symmetric smoothing kernel");
  }
  DensityEstimate density = estimate_density(data, lattice, floor);

  const Eigen::Index n = data.size();
  Eigen::VectorXd a(n);
  Eigen::Index clamped = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double g = density.raw(data.X.row(j).transpose());
    if (g < floor) ++clamped;
    a[j] = data.Y[j] / std::max(g, floor);
  }
  Eigen::VectorXcd coeffs = empirical_coeffs(data.X, a, lattice);

  // Fitted values at the design points via the coefficient form, which equals
  // the weight-sum form term by term and costs O(n |lattice|).
  const IndexMatrix& k = lattice.indices();
  const Eigen::VectorXd& w = lattice.weights();
  Eigen::VectorXd fitted(n);
  PhaseTable phases(lattice.dim(), lattice.max_abs_component());
  for (Eigen::Index j = 0; j < n; ++j) {
    phases.assign(data.X.row(j).transpose());
    double sum = 0.0;
    for (Eigen::Index r = 0; r < lattice.size(); ++r) {
      sum += w[r] * (coeffs[r] * phases.phase(k.row(r).data())).real();
    }
    fitted[j] = sum;
  }

  StandardizedResiduals residuals(data.Y - fitted);
  return RegressionFit(lattice, std::move(density), std::move(coeffs), data.X, std::move(a),
                       std::move(fitted), std::move(residuals), clamped);
}

double ecdf_eval(const RegressionFit& fit, double t) { return fit.residuals().ecdf(t); }

}  // namespace irgof
