#include "membrane/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "membrane/special.hpp"

namespace membrane {

namespace {

double ks_p_from_d(double d, double n_effective) {
  // Stephens' correction maps the finite-n statistic onto the asymptotic
  // Kolmogorov distribution.
  const double sn = std::sqrt(n_effective);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace

KsResult ks_test(const std::vector<double>& sample,
                 const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::vector<double> s = sample;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return {d, ks_p_from_d(d, n)};
}

KsResult ks_test_two_sample(const std::vector<double>& a,
                            const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_test_two_sample: empty sample");
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    if (sa[i] <= sb[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return {d, ks_p_from_d(d, na * nb / (na + nb))};
}

Chi2Result chi2_gof(const std::vector<std::int64_t>& observed,
                    const std::vector<double>& expected,
                    double min_expected) {
  if (observed.size() != expected.size())
    throw std::invalid_argument("chi2_gof: size mismatch");
  double stat = 0.0;
  int used = 0;
  double pooled_exp = 0.0;
  std::int64_t pooled_obs = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < 0.0 || !std::isfinite(expected[i]))
      throw std::invalid_argument("chi2_gof: bad expected count");
    if (expected[i] < min_expected) {
      pooled_exp += expected[i];
      pooled_obs += observed[i];
    } else {
      const double r = observed[i] - expected[i];
      stat += r * r / expected[i];
      ++used;
    }
  }
  if (pooled_exp >= min_expected) {
    const double r = pooled_obs - pooled_exp;
    stat += r * r / pooled_exp;
    ++used;
  } else if (pooled_obs > 0 && pooled_exp > 0.0) {
    // Too small to be a proper bin but not ignorable; keep it conservative.
    const double r = pooled_obs - pooled_exp;
    stat += r * r / std::max(pooled_exp, 1.0);
    ++used;
  } else if (pooled_obs > 0 && pooled_exp == 0.0) {
    return {std::numeric_limits<double>::infinity(), std::max(used - 1, 1), 0.0};
  }
  const int df = std::max(used - 1, 1);
  return {stat, df, chi2_sf(stat, df)};
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("variance: need n >= 2");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace membrane
