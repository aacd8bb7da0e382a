#include <gtest/gtest.h>

#include <cmath>

#include "glauber/asymptotics.hpp"
#include "glauber/autocorr.hpp"
#include "glauber/fit.hpp"

using namespace glauber;

namespace {

RateFunction g1(const TailModel& m) { return {RateKind::g1, m, 0.5}; }
RateFunction g2(const TailModel& m, double c = 0.5) { return {RateKind::g2, m, c}; }

}  // namespace

TEST(RateEval, ExponentialExamples) {
  const auto m = TailModel::exponential(8);
  EXPECT_NEAR(rate_eval(g1(m), 0.5), -1.3862944, 1e-7);
  for (double mu : {0.01, 0.3, 0.9}) {
    EXPECT_NEAR(rate_eval(g1(m), mu), 2 * std::log(mu), 1e-14);
    EXPECT_NEAR(rate_eval(g2(m, 0.3), mu), 8 * std::log(0.3 * mu), 1e-13);
  }
}

TEST(RateEval, StretchedExamples) {
  for (double a : {1.5, 2.0}) {
    const auto m = TailModel::stretched(a);
    for (double mu : {1e-6, 0.01, 0.4}) {
      EXPECT_NEAR(rate_eval(g1(m), mu), -std::pow(0.25, a) * std::pow(std::log(1 / mu), a), 1e-12);
      EXPECT_NEAR(rate_eval(g2(m), mu), -2 * std::pow(0.5, a) * std::pow(std::log(1 / (0.5 * mu)), a), 1e-12);
    }
  }
}

TEST(RateEval, ClosedFormsAgreeWithTailDefinition) {
  for (const auto& m : {TailModel::exponential(6), TailModel::stretched(1.7)}) {
    for (double mu : {1e-4, 0.05, 0.7}) {
      EXPECT_NEAR(rate_eval(g1(m), mu), std::log(tail_probability(m, 0.25 * std::log(1 / mu))), 1e-12);
      EXPECT_NEAR(rate_eval(g2(m), mu), 2 * std::log(tail_probability(m, 0.5 * std::log(1 / (0.5 * mu)))), 1e-12);
    }
  }
  const auto u = TailModel::uniform_bounded(2.0);
  EXPECT_NEAR(rate_eval(g1(u), 0.5), std::log(1 - 0.25 * std::log(2.0) / 2.0), 1e-14);
}

TEST(RateEval, DomainErrors) {
  const auto m = TailModel::exponential(8);
  EXPECT_THROW(rate_eval(g1(m), 0.0), std::domain_error);
  EXPECT_THROW(rate_eval(g1(m), 1.0), std::domain_error);
  EXPECT_THROW(rate_eval(g2(m, 1.5), 0.5), std::domain_error);
  EXPECT_THROW(legendre_min(g1(m), 0.0), std::domain_error);
}

TEST(RateDerivatives, ClosedFormsMatchDifferences) {
  for (const auto& m : {TailModel::exponential(8), TailModel::stretched(1.5), TailModel::stretched(2.0)}) {
    for (const auto& rf : {g1(m), g2(m)}) {
      for (double mu : {1e-3, 0.05, 0.4}) {
        const double h = 1e-6 * mu;
        const double fd = (rate_eval(rf, mu + h) - rate_eval(rf, mu - h)) / (2 * h);
        EXPECT_NEAR(rate_derivative(rf, mu) / fd, 1.0, 1e-6);
        EXPECT_NEAR(rate_curvature(rf, mu) / numeric_curvature(rf, mu), 1.0, 1e-4);
      }
    }
  }
}

TEST(Legendre, ExponentialExample) {
  const auto p = legendre_min(g1(TailModel::exponential(8)), 10.0);
  ASSERT_TRUE(p.interior);
  EXPECT_NEAR(p.mu, 0.2, 1e-12);
  EXPECT_NEAR(p.G, 5.2188758, 1e-7);
  EXPECT_NEAR(p.G, 2 - 2 * std::log(0.2), 1e-12);
  EXPECT_NEAR(p.gpp, -50.0, 1e-9);
  EXPECT_NEAR(p.gpp_numeric, -50.0, 1e-3);
}

TEST(Legendre, ExponentialMinimizersClosedForm) {
  for (double k : {5.0, 8.0}) {
    const auto m = TailModel::exponential(k);
    for (double t : geometric_grid(10, 1e4, 5)) {
      const auto p1 = legendre_min(g1(m), t);
      const auto p2 = legendre_min(g2(m), t);
      EXPECT_NEAR(p1.mu / (k / (4 * t)), 1.0, 1e-6);
      EXPECT_NEAR(p2.mu / (k / t), 1.0, 1e-6);
    }
  }
}

TEST(Legendre, BoundaryMinimumFlagged) {
  // k/(4t) > 1: no interior stationary point
  const auto p = legendre_min(g1(TailModel::exponential(8)), 1.0);
  EXPECT_FALSE(p.interior);
  EXPECT_TRUE(std::isnan(p.gpp));
}

TEST(Legendre, StretchedStationarity) {
  for (double a : {1.5, 2.0}) {
    const auto m = TailModel::stretched(a);
    for (double t : {1e2, 1e4, 1e6}) {
      for (const auto& rf : {g1(m), g2(m)}) {
        const auto p = legendre_min(rf, t);
        ASSERT_TRUE(p.interior);
        EXPECT_LE(std::abs(t - rate_derivative(rf, p.mu)), 1e-6 * t);
      }
    }
  }
  // leading order from the stretched example, reported as a ratio only
  const double t = 1e6;
  const auto p = legendre_min(g1(TailModel::stretched(2)), t);
  const double leading = 2 * std::pow(0.25, 2) * std::log(t) / t;
  RecordProperty("stretched_mu_ratio", std::to_string(p.mu / leading));
}

TEST(Legendre, MinimumBelowRandomProbes) {
  Stream s(4, 4);
  for (const auto& m : {TailModel::exponential(6), TailModel::stretched(1.5)}) {
    for (double t : {20.0, 500.0}) {
      for (const auto& rf : {g1(m), g2(m)}) {
        const auto p = legendre_min(rf, t);
        for (int i = 0; i < 50; ++i) {
          const double mu = std::exp(std::log(1e-9) * s.uniform_open());
          EXPECT_LE(p.G, t * mu - rate_eval(rf, mu) + 1e-10);
        }
      }
    }
  }
}

TEST(Legendre, ValueNondecreasingAndConcave) {
  const auto grid = geometric_grid(10, 1e5, 10);
  for (const auto& m : {TailModel::exponential(6), TailModel::stretched(2)}) {
    std::vector<double> G;
    for (double t : grid) G.push_back(legendre_min(g1(m), t).G);
    for (std::size_t i = 1; i < G.size(); ++i) EXPECT_GE(G[i], G[i - 1] - 1e-10);
    for (std::size_t i = 1; i + 1 < G.size(); ++i) {
      const double left = (G[i] - G[i - 1]) / (grid[i] - grid[i - 1]);
      const double right = (G[i + 1] - G[i]) / (grid[i + 1] - grid[i]);
      EXPECT_LE(right - left, 1e-8);
    }
  }
}

TEST(Envelope, ExponentialSlopes) {
  const double k = 8;
  std::vector<double> times;
  for (double t = 100; t <= 1e5; t *= 10) times.push_back(t);
  const auto env = envelope(TailModel::exponential(k), times, 0.5, 1.0, 1.0);
  for (std::size_t i = 0; i + 1 < env.size(); ++i) {
    ASSERT_TRUE(env[i].available && env[i + 1].available);
    const double du = (env[i + 1].log_upper - env[i].log_upper) / std::log(10.0);
    const double dl = (env[i + 1].log_lower - env[i].log_lower) / std::log(10.0);
    EXPECT_NEAR(du / (-k / 8), 1.0, 0.02);
    EXPECT_NEAR(dl / (-2 * k), 1.0, 0.02);
  }
  EXPECT_DOUBLE_EQ(env[0].power_upper, std::pow(101.0, -1.0));
  EXPECT_DOUBLE_EQ(env[0].power_lower, std::pow(101.0, -16.0));
}

TEST(Envelope, FiniteAtUnitConstants) {
  const std::vector<double> times = {1.0};
  // both minimizers interior at t = 1 need k < 1
  const auto env = envelope(TailModel::exponential(0.5), times, 0.5, 1.0, 1.0);
  ASSERT_TRUE(env[0].available);
  EXPECT_TRUE(std::isfinite(env[0].upper) && env[0].upper > 0);
  EXPECT_TRUE(std::isfinite(env[0].lower) && env[0].lower > 0);
}

TEST(Envelope, UnavailableAtBoundary) {
  const std::vector<double> times = {1.0};
  const auto env = envelope(TailModel::exponential(8), times, 0.5, 1.0, 1.0);
  EXPECT_FALSE(env[0].available);
  EXPECT_TRUE(std::isnan(env[0].upper));
  const std::vector<double> late = {100.0};
  EXPECT_TRUE(std::isnan(envelope(TailModel::stretched(2), late, 0.5, 1, 1)[0].power_upper));
}

TEST(PowerLawFit, RecoversExponent) {
  std::vector<double> x, y, se;
  for (double t = 1; t <= 1000; t *= 1.5) {
    x.push_back(t);
    y.push_back(3.0 * std::pow(t, -1.7));
    se.push_back(0.01 * y.back());
  }
  const auto fit = fit_power_law(x, y, se);
  EXPECT_NEAR(fit.line.slope, -1.7, 1e-12);
  EXPECT_NEAR(fit.line.intercept, std::log(3.0), 1e-12);
  EXPECT_FALSE(fit.poor);
}

TEST(PowerLawFit, ExponentialIsPoor) {
  std::vector<double> x, y, se;
  for (double t = 1; t <= 10; t += 0.5) {
    x.push_back(t);
    y.push_back(std::exp(-t));
    se.push_back(std::nan(""));
  }
  EXPECT_TRUE(fit_power_law(x, y, se).poor);
}

TEST(PowerLawFit, DropsNoisyPoints) {
  const std::vector<double> x = {1, 2, 4, 8};
  const std::vector<double> y = {1.0, 0.5, 0.25, 0.01};
  const std::vector<double> se = {0.01, 0.01, 0.01, 0.01};
  const auto fit = fit_power_law(x, y, se);
  EXPECT_EQ(fit.line.points, 3u);
  EXPECT_NEAR(fit.line.slope, -1.0, 1e-12);
  EXPECT_DOUBLE_EQ(fit.x_hi, 4.0);
}
