#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace membrane {

struct KsResult {
  double statistic = 0.0;  // sup-distance D
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a CDF. The sample is copied
/// and sorted internally. p-value uses the Stephens small-sample correction.
KsResult ks_test(const std::vector<double>& sample,
                 const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov test.
KsResult ks_test_two_sample(const std::vector<double>& a,
                            const std::vector<double>& b);

struct Chi2Result {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Pearson chi-squared goodness of fit. Bins with expected count below
/// min_expected are pooled into one bin before the statistic is formed;
/// df = (#bins after pooling) - 1.
Chi2Result chi2_gof(const std::vector<std::int64_t>& observed,
                    const std::vector<double>& expected,
                    double min_expected = 5.0);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased

}  // namespace membrane
