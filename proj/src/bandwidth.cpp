#include "irgof/bandwidth.hpp"

#include <algorithm>
#include <cmath>

#include "irgof/error.hpp"
#include "irgof/parallel.hpp"

namespace irgof {

std::vector<double> default_cv_grid(Eigen::Index n, int dim) {
  const auto top = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.0 / (2.0 + dim)) + 1e-9));
  std::vector<double> grid;
  for (int r = 1; r <= std::max(2, top); ++r) grid.push_back(r);
  return grid;
}

namespace {

// Leave-one-out predictions for every (observation, candidate) pair. All
// candidates share one pass over the pairs: each frequency of the largest
// lattice is credited to the smallest candidate ball that contains it and
// prefix sums recover W_r(d) for every r.
Eigen::MatrixXd loo_matrix(const Dataset& data, const std::vector<double>& radii, double floor,
                           std::size_t threads) {
  const Eigen::Index n = data.size();
  const auto R = static_cast<Eigen::Index>(radii.size());
  const FreqLattice lattice = enumerate_lattice(data.dim(), radii.back());
  const IndexMatrix& k = lattice.indices();
  const Eigen::Index L = lattice.size();

  std::vector<Eigen::Index> bucket(static_cast<std::size_t>(L));
  for (Eigen::Index r = 0; r < L; ++r) {
    const double sq = lattice.norm_squared(r);
    Eigen::Index c = 0;
    while (c + 1 < R && sq > radii[static_cast<std::size_t>(c)] * radii[static_cast<std::size_t>(c)] * (1.0 + 2e-12)) ++c;
    bucket[static_cast<std::size_t>(r)] = c;
  }

  // S(i, c) = sum_l W_c(X_i - X_l) = n g_c(X_i), via the coefficient form.
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(L);
  PhaseTable phases(data.dim(), lattice.max_abs_component());
  for (Eigen::Index j = 0; j < n; ++j) {
    phases.assign(data.X.row(j).transpose());
    for (Eigen::Index r = 0; r < L; ++r) phi[r] += std::conj(phases.phase(k.row(r).data()));
  }
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, R);
  for (Eigen::Index i = 0; i < n; ++i) {
    phases.assign(data.X.row(i).transpose());
    for (Eigen::Index r = 0; r < L; ++r) {
      S(i, bucket[static_cast<std::size_t>(r)]) += (phi[r] * phases.phase(k.row(r).data())).real();
    }
    for (Eigen::Index c = 1; c < R; ++c) S(i, c) += S(i, c - 1);
  }

  const double inv = 1.0 / static_cast<double>(n - 1);
  Eigen::MatrixXd preds(n, R);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    PhaseTable local(data.dim(), lattice.max_abs_component());
    Eigen::VectorXd w(R), num = Eigen::VectorXd::Zero(R);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      local.assign((data.X.row(j) - data.X.row(i)).transpose());
      w.setZero();
      for (Eigen::Index r = 0; r < L; ++r) w[bucket[static_cast<std::size_t>(r)]] += local.cosine(k.row(r).data());
      for (Eigen::Index c = 0; c < R; ++c) {
        if (c > 0) w[c] += w[c - 1];
        const double g = (S(i, c) - w[c]) * inv;
        num[c] += data.Y[i] * w[c] / std::max(g, floor);
      }
    }
    preds.row(j) = (num * inv).transpose();
  });
  return preds;
}

std::vector<double> sorted_radii(std::span<const double> radii) {
  if (radii.empty()) fail(ErrorKind::Domain, "cross-validation needs at least one candidate radius");
  std::vector<double> out(radii.begin(), radii.end());
  for (double r : out) {
    if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorKind::Domain, "candidate radii must be positive");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void require_loo_data(const Dataset& data, double floor) {
  if (data.size() < 3) {
    fail(ErrorKind::InsufficientData, "leave-one-out cross-validation needs at least 3 observations");
  }
  if (!(floor > 0.0)) fail(ErrorKind::Domain, "density floor must be positive");
}

}  // namespace

CvReport cv_select(const Dataset& data, std::span<const double> radii, double floor,
                   std::size_t threads) {
  require_loo_data(data, floor);
  const std::vector<double> grid = sorted_radii(radii);
  const Eigen::MatrixXd preds = loo_matrix(data, grid, floor, threads);

  CvReport report;
  double best = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const double score = (data.Y - preds.col(static_cast<Eigen::Index>(c))).squaredNorm() /
                         static_cast<double>(data.size());
    report.candidates.push_back({grid[c], score});
    if (c == 0 || score < best) {
      best = score;
      report.chosen = grid[c];
    }
  }
  return report;
}

Eigen::VectorXd loo_predictions(const Dataset& data, double radius, double floor,
                                std::size_t threads) {
  require_loo_data(data, floor);
  return loo_matrix(data, sorted_radii(std::span<const double>(&radius, 1)), floor, threads).col(0);
}

}  // namespace irgof
