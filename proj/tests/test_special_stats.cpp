#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "membrane/rng.hpp"
#include "membrane/special.hpp"
#include "membrane/stats.hpp"

using namespace membrane;

TEST_CASE("normal_cdf") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.0) ==
        doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(normal_cdf(-1.0) + normal_cdf(1.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("erfcx agrees with exp(x^2) erfc(x) and its asymptotics") {
  CHECK(erfcx(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(erfcx(1.0) * std::exp(-1.0) ==
        doctest::Approx(0.15729920705028513).epsilon(1e-13));
  // Asymptotic branch agrees with the direct product where both are finite.
  CHECK(erfcx(20.5) ==
        doctest::Approx(std::exp(20.5 * 20.5) * std::erfc(20.5)).epsilon(1e-11));
  // Large-argument decay ~ 1/(x sqrt(pi)).
  CHECK(erfcx(100.0) * 100.0 * std::sqrt(M_PI) ==
        doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(erfcx(-0.1), std::invalid_argument);
}

TEST_CASE("chi-squared survival") {
  CHECK(chi2_sf(30.0, 20) == doctest::Approx(0.06985366069940986).epsilon(1e-12));
  CHECK(chi2_sf(10.0, 10) == doctest::Approx(0.44049328506521257).epsilon(1e-12));
  CHECK(chi2_sf(5.0, 1) == doctest::Approx(0.025347318677468325).epsilon(1e-12));
  CHECK(chi2_sf(450.0, 399) == doctest::Approx(0.03945116508697965).epsilon(1e-11));
  CHECK_THROWS_AS(chi2_sf(1.0, 0), std::invalid_argument);
}

TEST_CASE("kolmogorov tail") {
  CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.26999967167735452).epsilon(1e-12));
  CHECK(kolmogorov_sf(1.36) == doctest::Approx(0.04948587675537791).epsilon(1e-12));
  CHECK(kolmogorov_sf(0.5) == doctest::Approx(0.96394524366487509).epsilon(1e-12));
  CHECK(kolmogorov_sf(-1.0) == 1.0);
}

TEST_CASE("one-sample KS accepts the true law and rejects a wrong one") {
  Rng rng(7, 0);
  std::vector<double> sample(4000);
  for (auto& s : sample) s = rng.normal();
  const auto ok = ks_test(sample, [](double x) { return normal_cdf(x); });
  CHECK(ok.p_value > 0.01);
  const auto bad =
      ks_test(sample, [](double x) { return normal_cdf(x - 0.25); });
  CHECK(bad.p_value < 1e-6);
}

TEST_CASE("two-sample KS") {
  Rng rng(8, 0);
  std::vector<double> a(3000), b(3000), c(3000);
  for (auto& s : a) s = rng.normal();
  for (auto& s : b) s = rng.normal();
  for (auto& s : c) s = rng.normal() + 0.3;
  CHECK(ks_test_two_sample(a, b).p_value > 0.01);
  CHECK(ks_test_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("chi-squared goodness of fit with pooling") {
  Rng rng(9, 0);
  const int bins = 10, n = 10000;
  std::vector<std::int64_t> obs(bins, 0);
  for (int i = 0; i < n; ++i)
    ++obs[std::min(bins - 1, int(rng.uniform() * bins))];
  std::vector<double> expected(bins, double(n) / bins);
  const auto res = chi2_gof(obs, expected);
  CHECK(res.df == bins - 1);
  CHECK(res.p_value > 0.001);

  // A wrong expectation is rejected.
  std::vector<double> wrong(bins, double(n) / bins);
  wrong[0] *= 1.5;
  wrong[1] *= 0.5;
  CHECK(chi2_gof(obs, wrong).p_value < 1e-6);

  // Tiny-expectation bins are pooled, reducing df.
  std::vector<std::int64_t> obs2 = obs;
  obs2.push_back(1);
  obs2.push_back(0);
  std::vector<double> exp2 = expected;
  exp2.push_back(0.6);
  exp2.push_back(0.4);
  const auto pooled = chi2_gof(obs2, exp2);
  CHECK(pooled.df == bins);  // the two tiny bins merge into one
}

TEST_CASE("mean and variance") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(mean(v) == doctest::Approx(2.5));
  CHECK(variance(v) == doctest::Approx(5.0 / 3.0));
  CHECK_THROWS_AS(mean({}), std::invalid_argument);
}
