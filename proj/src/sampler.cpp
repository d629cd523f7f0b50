#include "membrane/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "membrane/special.hpp"

namespace membrane {

namespace {

double sgn(double x) { return (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_time(double t, const char* where) {
  if (!(t > 0.0))
    throw std::invalid_argument(std::string(where) + ": t must be > 0");
}

// Endpoint in ambient coordinates from its nu-component: lateral Gaussian
// with mean x_S + ((y_nu - x_nu)/sigma^2) b and covariance t B_S.
Eigen::VectorXd assemble_endpoint(double t, const Eigen::VectorXd& x,
                                  double ynu, const SpaceDecomposition& dec,
                                  Rng& rng) {
  const double xnu = x.dot(dec.nu);
  const int k = dec.d - 1;
  Eigen::VectorXd xi(k);
  for (int j = 0; j < k; ++j) xi[j] = rng.normal();
  Eigen::VectorXd y_s = dec.basis.transpose() * x +
                        ((ynu - xnu) / dec.sigma2) * dec.b_basis +
                        std::sqrt(t) * (dec.chol_B_S * xi);
  return dec.basis * y_s + ynu * dec.nu;
}

// Monotone cubic (Fritsch-Carlson) interpolation of ys over xs at u.
double monotone_cubic(const std::vector<double>& xs,
                      const std::vector<double>& ys, double u) {
  const std::size_t n = xs.size();
  const auto it = std::upper_bound(xs.begin(), xs.end(), u);
  std::size_t i = (it == xs.begin()) ? 0 : (it - xs.begin() - 1);
  i = std::min(i, n - 2);
  const double h = xs[i + 1] - xs[i];
  if (h <= 0.0) return ys[i];
  const double s = (ys[i + 1] - ys[i]) / h;
  auto secant = [&](std::size_t j) {
    const double hj = xs[j + 1] - xs[j];
    return hj > 0.0 ? (ys[j + 1] - ys[j]) / hj : 0.0;
  };
  auto slope_at = [&](std::size_t j) {
    if (j == 0) return secant(0);
    if (j == n - 1) return secant(n - 2);
    const double s0 = secant(j - 1), s1 = secant(j);
    if (s0 * s1 <= 0.0) return 0.0;
    return 2.0 * s0 * s1 / (s0 + s1);  // harmonic mean keeps monotonicity
  };
  double d0 = slope_at(i), d1 = slope_at(i + 1);
  if (s == 0.0) d0 = d1 = 0.0;
  const double w = (u - xs[i]) / h;
  const double w2 = w * w, w3 = w2 * w;
  return ys[i] * (2 * w3 - 3 * w2 + 1) + h * d0 * (w3 - 2 * w2 + w) +
         ys[i + 1] * (-2 * w3 + 3 * w2) + h * d1 * (w3 - w2);
}

// Draw z with density z (z - a) exp{-z^2/(2 v)} on (a, a + 10 sd) through a
// 1024-point tabulated inverse CDF. The CDF has the closed form
//   F(z) ~ (a - z) E(z) + sqrt(2 pi v)/2 [erfcx(s/sqrt2) - E(z) erfcx(z/(sd sqrt2))],
// E(z) = exp(-(z^2 - a^2)/(2v)), written in scaled form so it survives a >> sd.
double draw_z_inverse_cdf(double a, double sd, Rng& rng) {
  const double v = sd * sd;
  const int n = 1024;
  std::vector<double> zs(n), cdf(n);
  const double span = 10.0 * sd;
  const double sqrt2pi_v = std::sqrt(2.0 * M_PI * v);
  const double base = erfcx(a / (sd * M_SQRT2));
  for (int i = 0; i < n; ++i) {
    const double z = a + span * i / (n - 1);
    const double e = std::exp(-(z - a) * (z + a) / (2.0 * v));
    zs[i] = z;
    cdf[i] = (a - z) * e +
             0.5 * sqrt2pi_v * (base - e * erfcx(z / (sd * M_SQRT2)));
  }
  const double total = cdf[n - 1];
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::runtime_error(
        "sample_hit_magnitude_and_theta: inverse-CDF tabulation failed");
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    cdf[i] = std::max(prev, cdf[i] / total);  // enforce monotonicity
    prev = cdf[i];
  }
  cdf[0] = 0.0;
  cdf[n - 1] = 1.0;
  return monotone_cubic(cdf, zs, rng.uniform());
}

double draw_z(double t, double a, const SpaceDecomposition& dec, Rng& rng) {
  const double sd = std::sqrt(t * dec.sigma2);
  // Overall acceptance of the Maxwell scheme equals the hit probability
  // 2 (1 - Phi(a / sd)).
  const double acceptance = std::erfc(a / (sd * M_SQRT2));
  if (acceptance < 1e-4) return draw_z_inverse_cdf(a, sd, rng);
  for (;;) {
    const double n1 = rng.normal(), n2 = rng.normal(), n3 = rng.normal();
    const double z = sd * std::sqrt(n1 * n1 + n2 * n2 + n3 * n3);
    if (z <= a) continue;
    if (rng.uniform() < (z - a) / z) return z;
  }
}

}  // namespace

double hit_probability(double t, double x_nu, const SpaceDecomposition& dec) {
  require_time(t, "hit_probability");
  const double s = std::abs(x_nu) / std::sqrt(t * dec.sigma2);
  return std::erfc(s * M_SQRT1_2);
}

Eigen::VectorXd sample_no_hit_endpoint(double t, const Eigen::VectorXd& x,
                                       const SpaceDecomposition& dec,
                                       Rng& rng) {
  require_time(t, "sample_no_hit_endpoint");
  const double xnu = x.dot(dec.nu);
  if (xnu == 0.0)
    throw std::invalid_argument(
        "sample_no_hit_endpoint: x_nu = 0 (no-hit event has probability 0)");
  const double v = t * dec.sigma2;
  const double sd = std::sqrt(v);
  double ynu;
  for (;;) {
    ynu = xnu + sd * rng.normal();
    if (sgn(ynu) != sgn(xnu)) continue;
    // Ratio of the killed kernel to the free proposal.
    if (rng.uniform() < 1.0 - std::exp(-2.0 * std::abs(xnu) * std::abs(ynu) / v))
      break;
  }
  return assemble_endpoint(t, x, ynu, dec, rng);
}

std::pair<double, double> sample_hit_magnitude_and_theta(
    double t, double a, const SpaceDecomposition& dec, Rng& rng) {
  require_time(t, "sample_hit_magnitude_and_theta");
  if (a < 0.0)
    throw std::invalid_argument("sample_hit_magnitude_and_theta: a must be >= 0");
  const double z = draw_z(t, a, dec, rng);
  const double u = rng.uniform() * (z - a);
  return {u, (z - a - u) / dec.sigma2};
}

JointSample sample_joint(double t, const Eigen::VectorXd& x,
                         const ModelParams& params,
                         const SpaceDecomposition& dec, Rng& rng) {
  require_time(t, "sample_joint");
  if (!(std::abs(params.q) <= 1.0))
    throw std::invalid_argument("sample_joint: |q| must be <= 1");
  const double xnu = x.dot(dec.nu);
  const double p_hit = hit_probability(t, xnu, dec);
  JointSample out;
  if (rng.uniform() < p_hit) {
    const double sign = (rng.uniform() < 0.5 * (1.0 + params.q)) ? 1.0 : -1.0;
    const auto [m, theta] =
        sample_hit_magnitude_and_theta(t, std::abs(xnu), dec, rng);
    out.y = assemble_endpoint(t, x, sign * m, dec, rng);
    out.theta = theta;
    out.hit = true;
  } else {
    out.y = sample_no_hit_endpoint(t, x, dec, rng);
    out.theta = 0.0;
    out.hit = false;
  }
  return out;
}

std::pair<Eigen::VectorXd, double> step(double t, const Eigen::VectorXd& x,
                                        const ModelParams& params,
                                        const SpaceDecomposition& dec,
                                        Rng& rng) {
  JointSample s = sample_joint(t, x, params, dec, rng);
  return {s.y + s.theta * params.alpha, s.theta};
}

PathSkeleton sample_path(const Eigen::VectorXd& x0,
                         const std::vector<double>& grid,
                         const ModelParams& params,
                         const SpaceDecomposition& dec, Rng& rng) {
  if (grid.empty() || !(grid.front() > 0.0))
    throw std::invalid_argument("sample_path: grid must start above 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("sample_path: grid must be strictly increasing");

  PathSkeleton path;
  const std::size_t n = grid.size();
  path.times.resize(n + 1);
  path.local_time.resize(n + 1);
  path.states.resize(n + 1, x0.size());
  path.times[0] = 0.0;
  path.local_time[0] = 0.0;
  path.states.row(0) = x0;

  Eigen::VectorXd x = x0;
  double prev_t = 0.0, eta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto [x_next, dtheta] = step(grid[i] - prev_t, x, params, dec, rng);
    eta += dtheta;
    x = std::move(x_next);
    path.times[i + 1] = grid[i];
    path.local_time[i + 1] = eta;
    path.states.row(i + 1) = x;
    prev_t = grid[i];
  }
  return path;
}

}  // namespace membrane
