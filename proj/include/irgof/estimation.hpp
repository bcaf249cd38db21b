#pragma once

// Fourier series estimation of the distorted regression function K theta
// from scattered design points on [0,1]^m, and the standardized residuals
// that feed the goodness-of-fit test.

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "irgof/spectral.hpp"

namespace irgof {

inline constexpr double kDefaultDensityFloor = 0.05;

/// n covariate points in [0,1]^m (one per row of X) with scalar responses.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd Y;

  Eigen::Index size() const { return Y.size(); }
  int dim() const { return static_cast<int>(X.cols()); }

  /// Copy without observation j.
  Dataset without(Eigen::Index j) const;
};

/// Checks shapes, finiteness and that every coordinate lies in [0,1].
/// Throws Error(Range) naming the first offending row (1-based).
Dataset make_dataset(Eigen::MatrixXd X, Eigen::VectorXd Y);

/// Series estimate of the covariate density,
/// g(x) = sum_k Lambda(c k) phi(k) exp(i 2 pi k.x), phi(k) = mean exp(-i 2 pi k.X_j).
class DensityEstimate {
 public:
  DensityEstimate(FreqLattice lattice, Eigen::VectorXcd coeffs, double floor);

  const FreqLattice& lattice() const { return lattice_; }
  const Eigen::VectorXcd& coeffs() const { return coeffs_; }
  double floor() const { return floor_; }

  /// Un-clamped estimate.
  double raw(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// max(raw(x), floor); the value used wherever the estimate divides.
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Exact integral of the un-clamped estimate over [0,1]^m.
  double integral() const;

 private:
  FreqLattice lattice_;
  Eigen::VectorXcd coeffs_;
  double floor_;
};

DensityEstimate estimate_density(const Dataset& data, const FreqLattice& lattice,
                                 double floor = kDefaultDensityFloor);

/// R(k) = mean of Y_j / g(X_j) exp(-i 2 pi k.X_j) over the lattice.
Eigen::VectorXcd estimate_coeffs(const Dataset& data, const DensityEstimate& density,
                                 const FreqLattice& lattice);

/// Residuals, their root-mean-square scale and the empirical distribution
/// function of the standardized residuals.
class StandardizedResiduals {
 public:
  /// Throws Error(DegenerateFit) when every residual is zero.
  explicit StandardizedResiduals(Eigen::VectorXd residuals);

  Eigen::Index size() const { return residuals_.size(); }
  const Eigen::VectorXd& residuals() const { return residuals_; }
  double sigma() const { return sigma_; }
  /// Z_j = residual_j / sigma in observation order.
  const Eigen::VectorXd& standardized() const { return standardized_; }
  /// Z sorted ascending (stable).
  const std::vector<double>& sorted() const { return sorted_; }

  /// (1/n) #{j : Z_j <= t}.
  double ecdf(double t) const;
  /// The ceil(p n)-th order statistic (1-based), p in (0, 1].
  double order_statistic(double p) const;

 private:
  Eigen::VectorXd residuals_;
  double sigma_ = 0.0;
  Eigen::VectorXd standardized_;
  std::vector<double> sorted_;
};

/// Fitted Fourier series estimator with its residuals.
class RegressionFit {
 public:
  RegressionFit(FreqLattice lattice, DensityEstimate density, Eigen::VectorXcd coeffs,
                Eigen::MatrixXd X, Eigen::VectorXd response_weights, Eigen::VectorXd fitted,
                StandardizedResiduals residuals, Eigen::Index clamped);

  const FreqLattice& lattice() const { return lattice_; }
  const DensityEstimate& density() const { return density_; }
  /// R(k) in lattice order.
  const Eigen::VectorXcd& coeffs() const { return coeffs_; }
  /// K theta at the design points.
  const Eigen::VectorXd& fitted() const { return fitted_; }
  const StandardizedResiduals& residuals() const { return residuals_; }
  Eigen::Index size() const { return fitted_.size(); }
  double sigma() const { return residuals_.sigma(); }
  /// Design points where the density estimate was raised to the floor.
  Eigen::Index clamped_count() const { return clamped_; }

  /// Coefficient form sum_k Lambda(c k) R(k) exp(i 2 pi k.x).
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::complex<double> evaluate_complex(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Weight-sum form (1/n) sum_j Y_j / g(X_j) W_c(x - X_j).
  double evaluate_direct(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  FreqLattice lattice_;
  DensityEstimate density_;
  Eigen::VectorXcd coeffs_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd response_weights_;
  Eigen::VectorXd fitted_;
  StandardizedResiduals residuals_;
  Eigen::Index clamped_;
};

/// Fits K theta, the residuals Y_j - K theta(X_j), sigma and Z. Requires a
/// radially symmetric kernel; throws Error(DegenerateFit) when sigma = 0.
RegressionFit fit(const Dataset& data, const FreqLattice& lattice,
                  double floor = kDefaultDensityFloor);

double ecdf_eval(const RegressionFit& fit, double t);

}  // namespace irgof
