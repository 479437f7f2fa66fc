#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "helpers.hpp"

using namespace bnsynth;
namespace bm = boost::math;

TEST(LogGamma, RelativeAccuracy) {
  for (double x = 0.01; x < 2000.0; x *= 1.07) {
    const double ref = static_cast<double>(bm::lgamma(static_cast<long double>(x)));
    const double got = special::log_gamma(x);
    EXPECT_NEAR(got, ref, 1e-12 * std::max(1.0, std::fabs(ref))) << "x=" << x;
  }
  EXPECT_NEAR(special::log_gamma(1.0), 0.0, 1e-14);
  EXPECT_NEAR(special::log_gamma(2.0), 0.0, 1e-14);
  EXPECT_NEAR(special::log_gamma(0.5), 0.5 * std::log(M_PI), 1e-14);
  EXPECT_NEAR(special::log_gamma(171.0), 706.5730622457874, 1e-9);
}

TEST(IncompleteGamma, AgainstBoost) {
  for (double a : {0.5, 1.0, 2.5, 10.0, 50.0})
    for (double x : {1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 40.0, 120.0}) {
      EXPECT_NEAR(special::gamma_p(a, x), bm::gamma_p(a, x), 1e-13) << a << " " << x;
      const double q = bm::gamma_q(a, x);
      EXPECT_NEAR(special::gamma_q(a, x), q, std::max(1e-13, 1e-10 * q)) << a << " " << x;
    }
  EXPECT_EQ(special::gamma_p(2.0, 0.0), 0.0);
  EXPECT_EQ(special::gamma_q(2.0, 0.0), 1.0);
}

TEST(IncompleteBeta, AgainstBoost) {
  for (double a : {0.5, 1.0, 2.0, 7.5})
    for (double b : {0.5, 2.0, 10.0})
      for (double x : {0.0, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0})
        EXPECT_NEAR(special::beta_inc(a, b, x), bm::ibeta(a, b, x), 1e-12) << a << " " << b << " " << x;
}

TEST(ChiSquare, SurvivalReferenceValues) {
  EXPECT_NEAR(special::chi2_sf(3.841458820694124, 1), 0.05, 1e-12);
  EXPECT_NEAR(special::chi2_sf(6.634896601021214, 1), 0.01, 1e-12);
  EXPECT_NEAR(special::chi2_sf(20.0 / 3.0, 1), 0.009823274507519247, 1e-12);
  EXPECT_EQ(special::chi2_sf(0.0, 1), 1.0);
  const bm::chi_squared dist(1.0);
  for (double x = 0.001; x < 200; x *= 1.3) {
    const double q = bm::cdf(bm::complement(dist, x));
    EXPECT_NEAR(special::chi2_sf(x, 1), q, std::max(1e-15, 1e-10 * q)) << x;
  }
}

TEST(Normal, QuantileAndCdf) {
  EXPECT_NEAR(special::normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(special::normal_quantile(0.99), 2.3263478740408408, 1e-12);
  EXPECT_NEAR(special::normal_quantile(0.5), 0.0, 1e-15);
  const bm::normal dist;
  for (double p = 1e-10; p < 1.0; p = p < 0.5 ? p * 3 : 1 - (1 - p) / 3) {
    EXPECT_NEAR(special::normal_quantile(p), bm::quantile(dist, p), 1e-10) << p;
    if (1 - p < 1e-9) break;
  }
  for (double x = -8; x <= 8; x += 0.37) EXPECT_NEAR(special::normal_cdf(x), bm::cdf(dist, x), 1e-15);
}

TEST(StudentT, QuantileAndCdf) {
  EXPECT_NEAR(special::t_quantile(0.99, 4), 3.746947387979197, 1e-10);
  EXPECT_NEAR(special::t_quantile(0.975, 4), 2.776445105197793, 1e-10);
  EXPECT_NEAR(special::t_quantile(0.5, 4), 0.0, 1e-12);
  for (double df : {1.0, 2.0, 4.0, 9.0, 30.0}) {
    const bm::students_t dist(df);
    for (double p : {0.001, 0.01, 0.05, 0.2, 0.5, 0.8, 0.95, 0.99, 0.999})
      EXPECT_NEAR(special::t_quantile(p, df), bm::quantile(dist, p), 1e-9) << df << " " << p;
    for (double t = -20; t <= 20; t += 1.3) EXPECT_NEAR(special::t_cdf(t, df), bm::cdf(dist, t), 1e-12);
  }
}
