#pragma once

// Frequency lattices, Fourier smoothing kernels and the smoothing weight
// function W_c(x) = sum_k Lambda(c k) exp(i 2 pi k.x) on the unit torus.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace irgof {

/// Integer frequency multi-indices, one per row.
using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultLatticeCap = 10'000'000;

enum class KernelKind { SpectralCutoff };

/// Fourier smoothing kernel u -> Lambda(u). Lambda(u) = 1 on the unit ball and
/// is bounded by one in absolute value outside it.
class SmoothingKernel {
 public:
  explicit SmoothingKernel(KernelKind kind = KernelKind::SpectralCutoff) : kind_(kind) {}

  KernelKind kind() const { return kind_; }

  /// Only radially symmetric kernels are accepted by the testing pipeline.
  bool radially_symmetric() const;

  /// Lambda vanishes for ||u|| beyond this radius.
  double support_radius() const;

  /// Lambda as a function of ||u|| (kernel must be radially symmetric).
  double radial(double norm) const;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& u) const;

 private:
  KernelKind kind_;
};

/// All k in Z^m with ||c k|| inside the kernel support, in lexicographic
/// order, with weights Lambda(c k). Immutable after construction.
class FreqLattice {
 public:
  FreqLattice(SmoothingKernel kernel, int dim, double smoothing,
              std::size_t cap = kDefaultLatticeCap);

  int dim() const { return dim_; }
  double smoothing() const { return smoothing_; }
  /// Euclidean radius of the index ball, support_radius / c.
  double radius() const { return radius_; }
  Eigen::Index size() const { return indices_.rows(); }

  const SmoothingKernel& kernel() const { return kernel_; }
  const IndexMatrix& indices() const { return indices_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  /// Largest |k_l| over all indices and coordinates.
  int max_abs_component() const { return max_abs_; }
  /// Row of the zero frequency.
  Eigen::Index zero_row() const { return zero_row_; }
  /// Row of -k for every row k.
  const std::vector<Eigen::Index>& negation() const { return negation_; }

  /// Squared Euclidean norm of row r.
  double norm_squared(Eigen::Index r) const;

 private:
  SmoothingKernel kernel_;
  int dim_;
  double smoothing_;
  double radius_;
  IndexMatrix indices_;
  Eigen::VectorXd weights_;
  int max_abs_ = 0;
  Eigen::Index zero_row_ = 0;
  std::vector<Eigen::Index> negation_;
};

/// Spectral cutoff lattice {k : ||k|| <= radius}, all weights one.
FreqLattice enumerate_lattice(int dim, double radius, std::size_t cap = kDefaultLatticeCap);

/// exp(i 2 pi j x_l) for j = 0..K and every coordinate l, so that
/// exp(i 2 pi k.x) is a product of table entries (conjugated for k_l < 0).
class PhaseTable {
 public:
  PhaseTable(int dim, int max_abs);

  void assign(const Eigen::Ref<const Eigen::VectorXd>& x);

  /// exp(i 2 pi k.x) for the multi-index stored at `k` (dim entries).
  std::complex<double> phase(const int* k) const {
    std::complex<double> z = entry(0, k[0]);
    for (int l = 1; l < dim_; ++l) z *= entry(l, k[l]);
    return z;
  }

  /// cos(2 pi k.x), with the two-dimensional case unrolled.
  double cosine(const int* k) const {
    if (dim_ == 2) {
      const std::complex<double> a = entry(0, k[0]);
      const std::complex<double> b = entry(1, k[1]);
      return a.real() * b.real() - a.imag() * b.imag();
    }
    return phase(k).real();
  }

 private:
  std::complex<double> entry(int l, int j) const {
    const std::complex<double>& z = table_[static_cast<std::size_t>(l * (max_abs_ + 1) + (j < 0 ? -j : j))];
    return j < 0 ? std::conj(z) : z;
  }

  int dim_;
  int max_abs_;
  std::vector<std::complex<double>> table_;
};

/// W_c(x), evaluated in the real cosine form.
double smoothing_weight(const FreqLattice& lattice, const Eigen::Ref<const Eigen::VectorXd>& x);

/// W_c(x) summed in complex arithmetic; the imaginary part cancels for
/// symmetric lattices. Reference form for checking the cosine evaluation.
std::complex<double> smoothing_weight_complex(const FreqLattice& lattice,
                                              const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace irgof
