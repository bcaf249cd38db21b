#pragma once

// Leave-one-out cross-validation over spectral cutoff radii.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "irgof/estimation.hpp"

namespace irgof {

struct CvCandidate {
  double radius;
  double score;
};

struct CvReport {
  /// Ascending in radius.
  std::vector<CvCandidate> candidates;
  double chosen = 0.0;
};

/// Integer radii 1..max(2, floor(n^(1/(2+m)))).
std::vector<double> default_cv_grid(Eigen::Index n, int dim);

/// CV(r) = (1/n) sum_j (Y_j - Khat_{-j}(X_j))^2 for every candidate radius,
/// where observation j is dropped from both the density estimate and the
/// coefficient sums. Ties resolve to the smallest radius.
CvReport cv_select(const Dataset& data, std::span<const double> radii,
                   double floor = kDefaultDensityFloor, std::size_t threads = 1);

/// Leave-one-out predictions Khat_{-j}(X_j) for a single radius.
Eigen::VectorXd loo_predictions(const Dataset& data, double radius,
                                double floor = kDefaultDensityFloor, std::size_t threads = 1);

}  // namespace irgof
