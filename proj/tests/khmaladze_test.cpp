#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "irgof/error.hpp"
#include "irgof/khmaladze.hpp"
#include "irgof/simulation.hpp"
#include "oracles.hpp"

using namespace irgof;

namespace {

double min_eigenvalue(const Eigen::Matrix3d& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues()[0];
}

StandardizedResiduals normal_residuals(std::uint64_t seed, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.7);
  Eigen::VectorXd e(n);
  for (Eigen::Index j = 0; j < n; ++j) e[j] = z(rng) + 0.2;
  return StandardizedResiduals(e);
}

}  // namespace

TEST(Gamma, ClosedFormLimitsAndOrigin) {
  const Eigen::Matrix3d full = Eigen::Vector3d(1, 1, 2).asDiagonal();
  EXPECT_LT((gamma_closed_form_gaussian(-std::numeric_limits<double>::infinity()) - full).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((gamma_closed_form_gaussian(-40.0) - full).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(gamma_closed_form_gaussian(std::numeric_limits<double>::infinity()).cwiseAbs().maxCoeff(), 1e-300);
  Eigen::Matrix3d at0;
  at0 << 0.5, 0.398942, 0, 0.398942, 0.5, 0.398942, 0, 0.398942, 1.0;
  EXPECT_LT((gamma_closed_form_gaussian(0.0) - at0).cwiseAbs().maxCoeff(), 5e-7);
  EXPECT_LT((gamma_closed_form_gaussian(0.37f).cast<double>() - gamma_closed_form_gaussian(0.37)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Gamma, ClosedFormMatchesQuadratureOracles) {
  const NullPtr g = gaussian_null();
  for (double t : {-5.0, -3.3, -2.0, -0.7, 0.0, 1.0, 1.8, 2.5}) {
    const Eigen::Matrix3d closed = gamma_closed_form_gaussian(t);
    EXPECT_LT((closed - oracle::gaussian_gamma_simpson(t)).cwiseAbs().maxCoeff(), 1e-6) << t;
    EXPECT_LT((closed - gamma_quadrature(*g, t)).cwiseAbs().maxCoeff(), 1e-6) << t;
    EXPECT_LT((closed - oracle::gaussian_gamma_formula(t)).cwiseAbs().maxCoeff(), 1e-14) << t;
  }
}

TEST(Gamma, QuadratureExamples) {
  const NullPtr g = gaussian_null();
  const Eigen::Matrix3d full = Eigen::Vector3d(1, 1, 2).asDiagonal();
  EXPECT_LT((gamma_quadrature(*g, -8.0) - full).cwiseAbs().maxCoeff(), 1e-6);
  // At t = 4 only the 1 - Phi and phi entries are below 5e-4; the entries
  // weighted by powers of t are larger (about 5.7e-4 up to 9.1e-3).
  const Eigen::Matrix3d tail = gamma_quadrature(*g, 4.0);
  EXPECT_LT(std::abs(tail(0, 0)), 5e-4);
  EXPECT_LT(std::abs(tail(0, 1)), 5e-4);
  EXPECT_LT((tail - oracle::gaussian_gamma_formula(4.0)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(tail(2, 2), 2.0 * (1.0 - oracle::normal_cdf(4.0)) + 68.0 * oracle::normal_pdf(4.0), 1e-9);
  const Eigen::Matrix3d q = gamma_quadrature(*g, 0.4);
  EXPECT_EQ(q, q.transpose());
}

TEST(Gamma, SymmetricPsdAndMonotone) {
  for (const std::string& name : null_names()) {
    const NullPtr null = make_null(name);
    const GammaProvider gamma(null);
    Eigen::Matrix3d previous = gamma(-6.0);
    for (double t = -6.0; t <= 4.0; t += 0.25) {
      const Eigen::Matrix3d G = gamma(t);
      EXPECT_LT((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_GE(min_eigenvalue(G), -1e-12) << name << " t=" << t;
      EXPECT_GE(min_eigenvalue(previous - G), -1e-9) << name << " t=" << t;
      previous = G;
    }
  }
}

TEST(Gamma, LogisticFullInformation) {
  const NullPtr logistic = make_null("logistic");
  Eigen::Matrix3d want;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      want(a, b) = oracle::simpson(
          [&](double u) {
            const double r = logistic->pdf_derivative(u) / logistic->pdf(u);
            const Eigen::Vector3d h(1.0, -r, -1.0 - u * r);
            return h[a] * h[b] * logistic->pdf(u);
          },
          -60.0, 60.0, 120000);
    }
  }
  EXPECT_LT((gamma_quadrature(*logistic, -60.0) - want).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Gamma, ProviderModes) {
  const GammaProvider closed(gaussian_null());
  EXPECT_EQ(closed.mode(), GammaMode::GaussianClosedForm);
  EXPECT_THROW(GammaProvider(make_null("logistic"), GammaMode::GaussianClosedForm), Error);

  const GammaProvider quad(gaussian_null(), GammaMode::Quadrature);
  const std::vector<double> grid{-4.0, -2.5, -1.0, 0.0, 0.3, 1.7, 2.6};
  const auto on_grid = quad.on_grid(grid);
  const auto on_grid_closed = closed.on_grid(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_LT((on_grid[i] - quad(grid[i])).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((on_grid[i] - on_grid_closed[i]).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Scan, StartsAtZeroAndInterpolates) {
  const NullPtr g = gaussian_null();
  const ScanFunction scan = build_scan(*g, GammaProvider(g), 2.3);
  EXPECT_EQ(scan.grid().size(), 4096);
  EXPECT_NEAR(scan.lower(), g->quantile(1e-6), 1e-12);
  EXPECT_EQ(scan.upper(), 2.3);
  EXPECT_EQ(scan.values().row(0), Eigen::RowVector3d::Zero());
  EXPECT_EQ(scan(scan.lower() - 1.0), Eigen::RowVector3d::Zero());
  EXPECT_EQ(scan(5.0), scan.values().row(4095));
  const double mid = 0.5 * (scan.grid()[100] + scan.grid()[101]);
  EXPECT_LT((scan(mid) - 0.5 * (scan.values().row(100) + scan.values().row(101))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Scan, DerivativeMatchesIntegrand) {
  const NullPtr g = gaussian_null();
  const ScanFunction scan = build_scan(*g, GammaProvider(g), 2.0);
  // Central difference across the grid nodes next to t = 0.
  const auto& grid = scan.grid();
  Eigen::Index i = 0;
  while (grid[i + 1] <= 0.0) ++i;
  if (grid[i + 1] < -grid[i]) ++i;
  const double t = grid[i];
  ASSERT_LT(std::abs(t), 1e-3);
  const Eigen::RowVector3d fd = (scan.values().row(i + 1) - scan.values().row(i - 1)) / (grid[i + 1] - grid[i - 1]);
  const Eigen::Vector3d want =
      oracle::gaussian_gamma_formula(t).ldlt().solve(Eigen::Vector3d(1, t, t * t - 1)) * oracle::normal_pdf(t);
  EXPECT_NEAR(fd[0], want[0], 1e-4);
  EXPECT_LT((fd.transpose() - want).cwiseAbs().maxCoeff(), 1e-4);
  const Eigen::Vector3d at0 =
      oracle::gaussian_gamma_formula(0.0).ldlt().solve(Eigen::Vector3d(1, 0, -1)) * oracle::normal_pdf(0.0);
  EXPECT_NEAR(at0[0], 6.43295, 1e-4);
}

TEST(Scan, GridRefinementIsStable) {
  const NullPtr g = gaussian_null();
  const GammaProvider gamma(g);
  const ScanFunction coarse = build_scan(*g, gamma, 2.33, {4096, 1e-6, 1e12});
  const ScanFunction fine = build_scan(*g, gamma, 2.33, {8191, 1e-6, 1e12});
  EXPECT_LT((coarse.values().row(4095) - fine.values().row(8190)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Scan, SingularityNamesTheAbscissa) {
  const NullPtr g = gaussian_null();
  try {
    build_scan(*g, GammaProvider(g), 12.0);
    FAIL() << "expected a singularity error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Singularity);
    EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_scan(*g, GammaProvider(g), -9.0), Error);
  EXPECT_THROW(build_scan(*g, GammaProvider(g), std::nan("")), Error);
}

TEST(Transform, SmallSampleOfNormalQuantiles) {
  const NullPtr g = gaussian_null();
  Eigen::VectorXd e(10);
  for (int j = 0; j < 10; ++j) e[j] = g->quantile((j + 0.5) / 10.0);
  const StandardizedResiduals r(e);
  const ProcessTrace trace = transform(r, *g, GammaProvider(g));
  const double T = statistic(trace);
  EXPECT_TRUE(std::isfinite(T));
  EXPECT_GT(T, 0.0);
  EXPECT_EQ(trace.t0, r.sorted()[9]);
  EXPECT_EQ(trace.ecdf_t0, 1.0);
  EXPECT_THROW(transform(StandardizedResiduals(e.head(9)), *g, GammaProvider(g)), Error);
}

TEST(Transform, TraceLayoutAndDeterminism) {
  const NullPtr g = gaussian_null();
  const StandardizedResiduals r = normal_residuals(4, 150);
  const ProcessTrace a = transform(r, *g, GammaProvider(g));
  const ProcessTrace b = transform(r, *g, GammaProvider(g));
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.eval_points, b.eval_points);
  EXPECT_EQ(a.t0, r.sorted()[148]);
  EXPECT_TRUE(std::is_sorted(a.eval_points.begin(), a.eval_points.end()));
  EXPECT_LE(a.eval_points.back(), a.t0);
  for (double v : a.values) EXPECT_TRUE(std::isfinite(v));
  // every order statistic up to t0 appears twice (left limit, then value)
  for (std::size_t j = 0; j < 149; ++j) {
    EXPECT_EQ(std::count(a.eval_points.begin(), a.eval_points.end(), r.sorted()[j]), 2) << j;
  }
}

TEST(Transform, MatchesBruteForceOracle) {
  const NullPtr g = gaussian_null();
  const GammaProvider gamma(g);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> size(10, 30);
  for (int c = 0; c < 20; ++c) {
    const StandardizedResiduals r = normal_residuals(1000 + c, size(rng));
    const ProcessTrace trace = transform(r, *g, gamma);
    const double worst = oracle::max_trace_gap(trace, r.sorted());
    EXPECT_LT(worst, 1e-4) << "case " << c << " n=" << r.size();
  }
}

TEST(Statistic, Examples) {
  const std::vector<double> zeros(5, 0.0);
  EXPECT_EQ(statistic(zeros, 0.99), 0.0);
  const std::vector<double> v{-3.0, 1.0};
  EXPECT_NEAR(statistic(v, 0.99), 3.0151, 5e-5);
  EXPECT_NEAR(statistic(v, 0.99), 3.0 / std::sqrt(0.99), 1e-15);
  EXPECT_THROW(statistic(std::vector<double>{}, 0.99), Error);
}

TEST(Brownian, QuantileAndTail) {
  EXPECT_NEAR(brownian_sup_quantile(0.05), 2.2414, 5e-4);
  EXPECT_NEAR(brownian_sup_tail(2.2414), 0.05, 5e-4);
  for (double a : {0.01, 0.05, 0.1, 0.5, 0.9}) EXPECT_NEAR(brownian_sup_tail(brownian_sup_quantile(a)), a, 1e-9);
  double previous = 1.0;
  for (double q = 0.2; q < 5.0; q += 0.1) {
    const double p = brownian_sup_tail(q);
    EXPECT_LE(p, previous);
    previous = p;
  }
  EXPECT_THROW(brownian_sup_quantile(0.0), Error);
  EXPECT_THROW(brownian_sup_quantile(1.0), Error);
}

TEST(Brownian, MedianAgainstRandomWalks) {
  const double mc = oracle::brownian_sup_quantile_mc(0.5, 200000, 1024, 12345);
  EXPECT_NEAR(brownian_sup_quantile(0.5), mc, 0.01);
}

TEST(Decide, ThresholdLogic) {
  EXPECT_FALSE(rejects(1.5141, 0.05));
  EXPECT_TRUE(rejects(39.8324, 0.05));
  const double q = brownian_sup_quantile(0.9999);
  EXPECT_LT(q, 0.5);
  EXPECT_TRUE(rejects(0.5, 0.9999));
  EXPECT_TRUE(rejects(1.0, 0.9999));
  EXPECT_FALSE(rejects(q, 0.9999));
}

TEST(Decide, ReportIsConsistent) {
  const NullPtr g = gaussian_null();
  const StandardizedResiduals r = normal_residuals(6, 300);
  const TestReport report = decide(r, g);
  EXPECT_EQ(report.reject, report.statistic > report.q_alpha);
  EXPECT_EQ(report.alpha, 0.05);
  EXPECT_EQ(report.n, 300);
  EXPECT_EQ(report.sigma_hat, r.sigma());
  EXPECT_EQ(report.statistic, statistic(report.trace));
  EXPECT_NEAR(report.ecdf_t0, 297.0 / 300.0, 1e-15);
  EXPECT_GT(report.ks_distance, 0.0);
  EXPECT_LT(report.ks_distance, 0.2);
}

TEST(Decide, ScaleAndPermutationInvariance) {
  const SyntheticModel model = benchmark_model(Design::Uniform, normal_errors(0.5));
  Rng rng = stream_rng(5, 0, 0);
  const Dataset d = generate(model, 250, rng);
  const FreqLattice lattice = enumerate_lattice(2, 2.0);
  const RegressionFit base = fit(d, lattice);
  const TestReport r0 = decide(base, gaussian_null(), 0.05);

  Dataset scaled = d;
  scaled.Y *= 3.7;
  const RegressionFit sf = fit(scaled, lattice);
  EXPECT_LT((sf.residuals().standardized() - base.residuals().standardized()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(decide(sf, gaussian_null(), 0.05).statistic, r0.statistic, 1e-6);

  std::vector<Eigen::Index> perm(250);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  Dataset p = d;
  for (Eigen::Index j = 0; j < 250; ++j) {
    p.X.row(j) = d.X.row(perm[static_cast<std::size_t>(j)]);
    p.Y[j] = d.Y[perm[static_cast<std::size_t>(j)]];
  }
  EXPECT_NEAR(decide(fit(p, lattice), gaussian_null(), 0.05).statistic, r0.statistic, 1e-9);
}

TEST(Decide, CalibratedWithKnownRegression) {
  // Residuals are the true errors, so only the transform and the Brownian limit are exercised.
  const NullPtr g = gaussian_null();
  const int reps = 500;
  int rejections = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = stream_rng(777, 0, static_cast<std::uint64_t>(rep));
    std::normal_distribution<double> z(0.0, 0.5);
    Eigen::VectorXd e(300);
    for (Eigen::Index j = 0; j < 300; ++j) e[j] = z(rng);
    rejections += decide(StandardizedResiduals(e), g).reject;
  }
  const double rate = static_cast<double>(rejections) / reps;
  // Binomial 95% band around 0.05 for 500 reps.
  EXPECT_GE(rate, 0.05 - 1.96 * std::sqrt(0.05 * 0.95 / reps));
  EXPECT_LE(rate, 0.05 + 1.96 * std::sqrt(0.05 * 0.95 / reps));
}

TEST(Decide, LevelOnDirectRegression) {
  // Identity distortion, uniform design, full cross-validated pipeline.
  const SyntheticModel model = benchmark_model(Design::Uniform, normal_errors(0.5), Distortion::Identity);
  const int reps = 500;
  int rejections = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = stream_rng(31337, 0, static_cast<std::uint64_t>(rep));
    rejections += analyze(generate(model, 500, rng), {}).report.reject;
  }
  EXPECT_NEAR(static_cast<double>(rejections) / reps, 0.05, 0.02);
}

TEST(Decide, GenericNullRuns) {
  const NullPtr logistic = make_null("logistic");
  Rng rng(3);
  Eigen::VectorXd e(200);
  for (Eigen::Index j = 0; j < 200; ++j) e[j] = logistic->sample(rng);
  const TestReport report = decide(StandardizedResiduals(e), logistic);
  EXPECT_TRUE(std::isfinite(report.statistic));
  EXPECT_GT(report.statistic, 0.0);
  EXPECT_EQ(report.reject, report.statistic > report.q_alpha);
}

TEST(Decide, KsDistanceOracle) {
  const NullPtr g = gaussian_null();
  const StandardizedResiduals r = normal_residuals(2, 50);
  double want = 0.0;
  for (double t = -5.0; t <= 5.0; t += 1e-4) {
    want = std::max(want, std::abs(r.ecdf(t) - oracle::normal_cdf(t)));
  }
  EXPECT_NEAR(ks_distance(r, *g), want, 1e-3);
  EXPECT_GE(ks_distance(r, *g), want - 1e-12);
}
