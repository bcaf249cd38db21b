#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "irgof/error.hpp"
#include "irgof/nulls.hpp"
#include "oracles.hpp"

using namespace irgof;

namespace {

// Gaussian law that relies on the generic score path.
class PlainGaussian final : public NullModel {
 public:
  std::string name() const override { return "plain"; }
  double cdf(double t) const override { return inner_.cdf(t); }
  double pdf(double t) const override { return inner_.pdf(t); }
  double pdf_derivative(double t) const override { return inner_.pdf_derivative(t); }
  double quantile(double p) const override { return inner_.quantile(p); }
  double sample(Rng& rng) const override { return inner_.sample(rng); }

 private:
  GaussianNull inner_;
};

struct Moments {
  double mean;
  double sd;
};

Moments sample_moments(const ErrorSampler& s, int draws, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = s.draw(rng);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / draws;
  return {mean, std::sqrt(sq / draws - mean * mean)};
}

}  // namespace

TEST(Gaussian, Examples) {
  const NullPtr g = gaussian_null();
  EXPECT_EQ(g->name(), "gaussian");
  EXPECT_DOUBLE_EQ(g->cdf(0.0), 0.5);
  EXPECT_NEAR(g->pdf(0.0), 0.3989423, 1e-7);
  EXPECT_NEAR(g->pdf_derivative(1.0), -0.2419707, 1e-7);
  EXPECT_NEAR(g->cdf(1.959963984540054), 0.975, 1e-15);
  EXPECT_NEAR(g->survival(8.0), oracle::normal_cdf(-8.0), 1e-28);
}

TEST(Nulls, QuantileInvertsCdf) {
  for (const std::string& name : null_names()) {
    const NullPtr null = make_null(name);
    for (double p = 0.001; p < 0.9995; p += 0.0049) {
      EXPECT_NEAR(null->cdf(null->quantile(p)), p, 1e-10) << name << " p=" << p;
    }
    EXPECT_NEAR(null->cdf(null->quantile(1e-9)), 1e-9, 1e-18) << name;
    EXPECT_THROW(null->quantile(0.0), Error);
    EXPECT_THROW(null->quantile(1.0), Error);
  }
}

TEST(Nulls, StandardizedMoments) {
  for (const std::string& name : null_names()) {
    const NullPtr null = make_null(name);
    const double lo = -40.0;
    const double hi = 40.0;
    const double mass = oracle::simpson([&](double t) { return null->pdf(t); }, lo, hi, 40000);
    const double mean = oracle::simpson([&](double t) { return t * null->pdf(t); }, lo, hi, 40000);
    const double var = oracle::simpson([&](double t) { return t * t * null->pdf(t); }, lo, hi, 40000);
    EXPECT_NEAR(mass, 1.0, 1e-9) << name;
    EXPECT_NEAR(mean, 0.0, 1e-6) << name;
    EXPECT_NEAR(var, 1.0, 1e-6) << name;
  }
}

TEST(Nulls, DensityDerivativeByFiniteDifferences) {
  for (const std::string& name : null_names()) {
    const NullPtr null = make_null(name);
    for (double t = -4.0; t <= 4.0; t += 0.25) {
      const double h = 1e-5;
      const double fd = (null->pdf(t + h) - null->pdf(t - h)) / (2 * h);
      EXPECT_NEAR(null->pdf_derivative(t), fd, 1e-8) << name << " t=" << t;
      const double cdf_fd = (null->cdf(t + h) - null->cdf(t - h)) / (2 * h);
      EXPECT_NEAR(null->pdf(t), cdf_fd, 1e-8) << name << " t=" << t;
    }
  }
}

TEST(Score, GaussianClosedForm) {
  const NullPtr g = gaussian_null();
  EXPECT_LT((score_h(*g, 2.0) - Eigen::Vector3d(1, 2, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((score_h(*g, 0.0) - Eigen::Vector3d(1, 0, -1)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((score_h(*g, -1.0) - Eigen::Vector3d(1, -1, 0)).cwiseAbs().maxCoeff(), 1e-12);
  const PlainGaussian plain;
  for (double t = -6.0; t <= 6.0; t += 0.1) {
    const Eigen::Vector3d want(1.0, t, t * t - 1.0);
    EXPECT_LT((score_h(*g, t) - want).cwiseAbs().maxCoeff(), 1e-12 * (1 + t * t));
    EXPECT_LT((score_h(plain, t) - want).cwiseAbs().maxCoeff(), 1e-12 * (1 + t * t));
  }
}

TEST(Score, MatchesLogDensitySlope) {
  for (const std::string& name : null_names()) {
    const NullPtr null = make_null(name);
    for (double t = -4.0; t <= 4.0; t += 0.2) {
      const double h = 1e-5;
      const double slope = (std::log(null->pdf(t + h)) - std::log(null->pdf(t - h))) / (2 * h);
      const Eigen::Vector3d s = score_h(*null, t);
      EXPECT_EQ(s[0], 1.0);
      EXPECT_NEAR(s[1], -slope, 1e-6) << name << " t=" << t;
      EXPECT_NEAR(s[2], -1.0 - t * slope, 1e-6) << name << " t=" << t;
    }
  }
}

TEST(Score, GenericPathRaisesOutsideRange) {
  const PlainGaussian plain;
  try {
    score_h(plain, 40.0);
    FAIL() << "expected an evaluation-range error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EvaluationRange);
  }
  EXPECT_NO_THROW(score_h(*gaussian_null(), 40.0));
}

TEST(Score, FisherInformation) {
  // E(1 + t^2) t^2 = 1 + 3 for the standard normal.
  EXPECT_NEAR(fisher_information(*gaussian_null()), 4.0, 1e-8);
  const NullPtr logistic = make_null("logistic");
  const double want = oracle::simpson(
      [&](double t) {
        const double r = logistic->pdf_derivative(t) / logistic->pdf(t);
        return (1.0 + t * t) * r * r * logistic->pdf(t);
      },
      -60.0, 60.0, 60000);
  EXPECT_NEAR(fisher_information(*logistic), want, 1e-7);
}

TEST(Nulls, UnknownNameListsOptions) {
  try {
    make_null("cauchy");
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    const std::string what = e.what();
    EXPECT_NE(what.find("gaussian"), std::string::npos);
    EXPECT_NE(what.find("logistic"), std::string::npos);
  }
}

TEST(Nulls, SamplerAgreesWithCdf) {
  for (const std::string& name : null_names()) {
    const NullPtr null = make_null(name);
    Rng rng(17);
    std::vector<double> x(100000);
    for (double& v : x) v = null->sample(rng);
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double F = null->cdf(x[i]);
      ks = std::max({ks, std::abs(F - i / n), std::abs((i + 1) / n - F)});
    }
    EXPECT_LT(ks, 0.01) << name;
  }
}

TEST(Samplers, PopulationStandardDeviations) {
  const auto samplers = alternative_samplers();
  ASSERT_EQ(samplers.size(), 4u);
  EXPECT_EQ(samplers[0].name(), "normal");
  EXPECT_EQ(samplers[1].name(), "laplace");
  EXPECT_EQ(samplers[2].name(), "skew-normal");
  EXPECT_EQ(samplers[3].name(), "student-t");
  EXPECT_NEAR(samplers[0].population_sd(), 0.5, 1e-15);
  EXPECT_NEAR(samplers[1].population_sd(), 0.7071, 5e-5);
  EXPECT_NEAR(samplers[3].population_sd(), 1.2247, 5e-5);
  const double delta = 3.0 / std::sqrt(10.0);
  EXPECT_NEAR(samplers[2].population_sd(), std::sqrt(1.0 - 2.0 * delta * delta / std::numbers::pi), 1e-12);
  EXPECT_NEAR(samplers[2].population_sd(), 0.6535, 5e-5);
}

TEST(Samplers, MonteCarloMoments) {
  const auto samplers = alternative_samplers();
  const Moments normal = sample_moments(samplers[0], 1000000, 1);
  EXPECT_NEAR(normal.sd, 0.5, 0.005);
  EXPECT_NEAR(normal.mean, 0.0, 0.005);
  const Moments laplace = sample_moments(samplers[1], 1000000, 2);
  EXPECT_NEAR(laplace.sd, 0.7071, 0.005);
  EXPECT_NEAR(laplace.mean, 0.0, 0.005);
  const Moments skew = sample_moments(samplers[2], 1000000, 3);
  EXPECT_NEAR(skew.mean, 0.0, 0.005);
  EXPECT_NEAR(skew.sd, samplers[2].population_sd(), 0.005);
  const Moments t = sample_moments(samplers[3], 1000000, 4);
  EXPECT_NEAR(t.mean, 0.0, 0.01);
  EXPECT_NEAR(t.sd, 1.2247, 0.02);
}

TEST(Samplers, ReproducibleAndNamed) {
  for (const char* name : {"normal", "laplace", "skew-normal", "student-t"}) {
    const ErrorSampler s = make_error_sampler(name);
    EXPECT_EQ(s.name(), name);
    Rng a(99);
    Rng b(99);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(s.draw(a), s.draw(b));
  }
  EXPECT_THROW(make_error_sampler("uniform"), Error);
  EXPECT_THROW(student_t_errors(2.0), Error);
}
