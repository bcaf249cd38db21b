#include "irgof/spectral.hpp"

#include <cassert>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "irgof/error.hpp"

namespace irgof {

namespace {

// Relative slack so that radii such as sqrt(5) keep the index (1, 2).
constexpr double kRadiusSlack = 1e-12;

}  // namespace

bool SmoothingKernel::radially_symmetric() const {
  switch (kind_) {
    case KernelKind::SpectralCutoff:
      return true;
  }
  return false;
}

double SmoothingKernel::support_radius() const {
  switch (kind_) {
    case KernelKind::SpectralCutoff:
      return 1.0;
  }
  return 1.0;
}

double SmoothingKernel::radial(double norm) const {
  switch (kind_) {
    case KernelKind::SpectralCutoff:
      return norm <= 1.0 + kRadiusSlack ? 1.0 : 0.0;
  }
  return 0.0;
}

double SmoothingKernel::operator()(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return radial(u.norm());
}

FreqLattice::FreqLattice(SmoothingKernel kernel, int dim, double smoothing, std::size_t cap)
    : kernel_(kernel), dim_(dim), smoothing_(smoothing) {
  if (dim < 1) fail(ErrorKind::Domain, "lattice dimension must be at least 1");
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    fail(ErrorKind::Domain, "smoothing parameter must be positive and finite");
  }
  radius_ = kernel_.support_radius() / smoothing_;
  const int reach = static_cast<int>(std::floor(radius_ * (1.0 + kRadiusSlack)));
  const double box = std::pow(2.0 * reach + 1.0, dim);
  if (box > static_cast<double>(cap)) {
    std::ostringstream msg;
    msg << "frequency lattice of dimension " << dim << " and radius " << radius_
        << " spans a box of " << std::fixed << std::setprecision(0) << box << " candidate indices, above the cap of " << cap;
    fail(ErrorKind::Resource, msg.str());
  }

  const double limit = radius_ * radius_ * (1.0 + 2.0 * kRadiusSlack);
  std::vector<int> flat;
  std::vector<double> weights;
  std::vector<int> k(static_cast<std::size_t>(dim), -reach);
  for (;;) {
    double sq = 0.0;
    for (int v : k) sq += static_cast<double>(v) * v;
    if (sq <= limit) {
      const double w = kernel_.radial(smoothing_ * std::sqrt(sq));
      if (w != 0.0) {
        flat.insert(flat.end(), k.begin(), k.end());
        weights.push_back(w);
      }
    }
    // Odometer, last coordinate fastest: lexicographic order.
    int l = dim - 1;
    while (l >= 0 && k[static_cast<std::size_t>(l)] == reach) {
      k[static_cast<std::size_t>(l)] = -reach;
      --l;
    }
    if (l < 0) break;
    ++k[static_cast<std::size_t>(l)];
  }

  const auto count = static_cast<Eigen::Index>(weights.size());
  indices_ = Eigen::Map<const IndexMatrix>(flat.data(), count, dim);
  weights_ = Eigen::Map<const Eigen::VectorXd>(weights.data(), count);
  max_abs_ = count > 0 ? indices_.cwiseAbs().maxCoeff() : 0;

  // Lexicographic order over a symmetric set maps row r to row count-1-r
  // under negation, and the origin sits in the middle.
  zero_row_ = count / 2;
  negation_.resize(static_cast<std::size_t>(count));
  for (Eigen::Index r = 0; r < count; ++r) {
    negation_[static_cast<std::size_t>(r)] = count - 1 - r;
    assert((indices_.row(r) + indices_.row(count - 1 - r)).isZero());
  }
  assert(indices_.row(zero_row_).isZero());
}

double FreqLattice::norm_squared(Eigen::Index r) const {
  return indices_.row(r).cast<double>().squaredNorm();
}

FreqLattice enumerate_lattice(int dim, double radius, std::size_t cap) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    fail(ErrorKind::Domain, "lattice radius must be positive and finite");
  }
  return FreqLattice(SmoothingKernel(KernelKind::SpectralCutoff), dim, 1.0 / radius, cap);
}

PhaseTable::PhaseTable(int dim, int max_abs)
    : dim_(dim), max_abs_(max_abs),
      table_(static_cast<std::size_t>(dim * (max_abs + 1)), std::complex<double>(1.0, 0.0)) {}

void PhaseTable::assign(const Eigen::Ref<const Eigen::VectorXd>& x) {
  assert(x.size() == dim_);
  for (int l = 0; l < dim_; ++l) {
    const double angle = 2.0 * std::numbers::pi * x[l];
    std::complex<double>* row = &table_[static_cast<std::size_t>(l * (max_abs_ + 1))];
    row[0] = {1.0, 0.0};
    if (max_abs_ == 0) continue;
    row[1] = {std::cos(angle), std::sin(angle)};
    for (int j = 2; j <= max_abs_; ++j) {
      // Recompute every 16 steps to stop the recurrence drifting.
      row[j] = (j % 16 == 0) ? std::complex<double>(std::cos(j * angle), std::sin(j * angle))
                             : row[j - 1] * row[1];
    }
  }
}

double smoothing_weight(const FreqLattice& lattice, const Eigen::Ref<const Eigen::VectorXd>& x) {
  PhaseTable phases(lattice.dim(), lattice.max_abs_component());
  phases.assign(x);
  const IndexMatrix& k = lattice.indices();
  const Eigen::VectorXd& w = lattice.weights();
  double sum = 0.0;
  for (Eigen::Index r = 0; r < lattice.size(); ++r) sum += w[r] * phases.cosine(k.row(r).data());
#ifndef NDEBUG
  const std::complex<double> reference = smoothing_weight_complex(lattice, x);
  assert(std::abs(reference.imag()) < 1e-10 * std::max(1.0, std::abs(reference.real())));
#endif
  return sum;
}

std::complex<double> smoothing_weight_complex(const FreqLattice& lattice,
                                              const Eigen::Ref<const Eigen::VectorXd>& x) {
  const IndexMatrix& k = lattice.indices();
  const Eigen::VectorXd& w = lattice.weights();
  std::complex<double> sum = 0.0;
  for (Eigen::Index r = 0; r < lattice.size(); ++r) {
    double dot = 0.0;
    for (int l = 0; l < lattice.dim(); ++l) dot += k(r, l) * x[l];
    sum += w[r] * std::polar(1.0, 2.0 * std::numbers::pi * dot);
  }
  return sum;
}

}  // namespace irgof
