#include "membrane/special.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace membrane {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double erfcx(double x) {
  if (x < 0.0) throw std::invalid_argument("erfcx: x must be >= 0");
  if (x <= 20.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series; relative error < 1e-12 for x > 20.
  const double ix2 = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 5; ++k) {
    term *= -(2 * k - 1) * ix2;
    sum += term;
  }
  return sum / (x * std::sqrt(M_PI));
}

double gamma_q(double a, double x) { return boost::math::gamma_q(a, x); }

double chi2_sf(double x, int df) {
  if (df <= 0) throw std::invalid_argument("chi2_sf: df must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // tail sum converges too slowly; Q ~ 1 here
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

}  // namespace membrane
