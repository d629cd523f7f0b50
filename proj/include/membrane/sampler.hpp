#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "membrane/geometry.hpp"
#include "membrane/rng.hpp"

namespace membrane {

/// One exact draw from the joint law of (endpoint, local-time increment) of
/// the skew process, before the tangential drift shift.
struct JointSample {
  Eigen::VectorXd y;
  double theta = 0.0;
  bool hit = false;  // theta > 0
};

/// Time grid, exact states and accumulated local time of one path.
struct PathSkeleton {
  std::vector<double> times;       // starts at 0
  Eigen::MatrixXd states;          // (#times) x d, row i = x(times[i])
  std::vector<double> local_time;  // eta(times[i]), nondecreasing, [0] = 0
};

/// P(eta_t > 0 | start at x_nu) = 2 (1 - Phi(|x_nu| / (sigma sqrt(t)))).
double hit_probability(double t, double x_nu, const SpaceDecomposition& dec);

/// Endpoint draw conditional on never touching S before t: y_nu from the
/// normalized killed kernel on sign(x_nu) (0, inf), y_S from the lateral
/// Gaussian given y_nu. Rejects x_nu = 0 (the no-hit event is null there).
Eigen::VectorXd sample_no_hit_endpoint(double t, const Eigen::VectorXd& x,
                                       const SpaceDecomposition& dec, Rng& rng);

/// Draw (m, theta) = (|y_nu|, local time) on the hit branch, for a = |x_nu|:
/// density proportional to (sigma^2 theta + a + m) exp{-(...)^2 / (2 t sigma^2)}.
/// Implemented through z = sigma^2 theta + a + m with density
/// z (z - a) exp{-z^2/(2 t sigma^2)} on (a, inf): Maxwell proposal thinned by
/// (z - a)/z, falling back to a tabulated inverse CDF when the estimated
/// acceptance drops below 1e-4; then m uniform on (0, z - a).
std::pair<double, double> sample_hit_magnitude_and_theta(
    double t, double a, const SpaceDecomposition& dec, Rng& rng);

/// Full joint draw: no-hit branch with probability 1 - hit_probability,
/// otherwise sign(y_nu) = +1 with probability (1+q)/2 and (|y_nu|, theta)
/// from the hit sampler.
JointSample sample_joint(double t, const Eigen::VectorXd& x,
                         const ModelParams& params,
                         const SpaceDecomposition& dec, Rng& rng);

/// One exact transition step: returns (y + alpha * theta, theta); the first
/// component is distributed with density G(t, x, .).
std::pair<Eigen::VectorXd, double> step(double t, const Eigen::VectorXd& x,
                                        const ModelParams& params,
                                        const SpaceDecomposition& dec,
                                        Rng& rng);

/// Chains exact steps over a strictly increasing grid of positive times,
/// accumulating local time additively.
PathSkeleton sample_path(const Eigen::VectorXd& x0,
                         const std::vector<double>& grid,
                         const ModelParams& params,
                         const SpaceDecomposition& dec, Rng& rng);

}  // namespace membrane
