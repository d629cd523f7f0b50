#pragma once

namespace membrane {

/// Standard normal CDF.
double normal_cdf(double x);

/// Scaled complementary error function exp(x^2) erfc(x), x >= 0.
/// Stays finite for large x where erfc underflows.
double erfcx(double x);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi2_sf(double x, int df);

/// Kolmogorov distribution tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

}  // namespace membrane
