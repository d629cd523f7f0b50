#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

#include "membrane/geometry.hpp"

namespace membrane {

/// Tolerances for the theta-integral in the transition density and for the
/// tensor y-quadratures built on top of it. tail_sigmas truncates the
/// substituted variable z = sigma^2 theta + |x_nu| + |y_nu| at
/// z_max = |x_nu| + |y_nu| + tail_sigmas * sigma * sqrt(t).
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  int max_panels = 64;
  double tail_sigmas = 10.0;

  void validate() const;
};

/// Value of the joint law of (endpoint, local time) at one point: `atom` is
/// the density in y of the theta = 0 component (the coefficient of
/// delta(theta)), `continuous` the joint density in (y, theta) for theta > 0.
struct JointDensityValue {
  double atom = 0.0;
  double continuous = 0.0;
};

/// Free Gaussian kernel det(2 pi t B)^{-1/2} exp{-(B^{-1}(y-x), y-x)/(2t)}.
double free_density(double t, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& y, const SpaceDecomposition& dec);

/// Conditional density g^S of the S-projection at y_S given the endpoint
/// nu-component y_nu: Gaussian on S with mean x_S + ((y_nu - x_nu)/sigma^2) b
/// and covariance t B_S.
double lateral_conditional_density(double t, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y,
                                   const SpaceDecomposition& dec);

/// Density of the skew process (membrane, no tangential drift).
double skew_density(double t, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& y, const SpaceDecomposition& dec,
                    double q);

/// Joint law of (endpoint, local time) of the skew process.
JointDensityValue joint_density(double t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y, double theta,
                                const SpaceDecomposition& dec, double q);

/// Transition density G(t, x, y) of the full process: the atom term plus the
/// theta-integral of the local-time-shifted lateral kernel, evaluated by
/// panel-doubling Gauss-Legendre after the substitution
/// z = sigma^2 theta + |x_nu| + |y_nu|. Throws QuadratureError if the
/// integral fails to converge within quad.max_panels.
double transition_density(double t, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, const ModelParams& params,
                          const SpaceDecomposition& dec,
                          const QuadratureSpec& quad = {});

/// Same integrand on a fixed rule (z_panels GL16 panels, no adaptivity), so
/// the value varies smoothly with (t, x, y). Finite-difference callers use
/// this to keep quadrature error out of their stencils.
double transition_density_fixed(double t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y,
                                const ModelParams& params,
                                const SpaceDecomposition& dec, int z_panels,
                                double tail_sigmas = 10.0);

/// Bounded test function with the decay information that justifies domain
/// truncation: |f| <= sup_norm everywhere, and f vanishes outside the ball
/// of support_radius around center (infinite radius = bounded support not
/// known; then the Gaussian decay of G alone truncates the domain).
struct TestFunction {
  std::function<double(const Eigen::VectorXd&)> f;
  double sup_norm = 1.0;
  Eigen::VectorXd center;
  double support_radius = std::numeric_limits<double>::infinity();
};

/// u(t, x, phi) = integral of phi(y) G(t, x, y) dy by tensor-product
/// Gauss-Legendre over (nu-axis split at 0) x (lateral axes), panels doubled
/// until the spec tolerance is met.
double density_u(double t, const Eigen::VectorXd& x, const TestFunction& phi,
                 const ModelParams& params, const SpaceDecomposition& dec,
                 const QuadratureSpec& quad = {});

/// The quadrature behind density_u with its node layout frozen at
/// construction: domain, panel counts and the inner z-rule are fixed, so
/// eval(t', x') at nearby arguments is a smooth function of (t', x').
/// PDE residual checks difference this object.
class UIntegrator {
 public:
  /// pad widens the integration box beyond what (t, x) needs, making room
  /// for stencil offsets around the construction point.
  UIntegrator(double t, const Eigen::VectorXd& x, TestFunction phi,
              const ModelParams& params, const SpaceDecomposition& dec,
              const QuadratureSpec& spec, double pad = 0.0);

  /// Fixed-rule evaluation (after calibrate(), or with default panels).
  double eval(double t, const Eigen::VectorXd& x) const;

  /// Doubles the outer panel count at the construction point until the spec
  /// tolerance is met, then freezes it for eval().
  void calibrate();

  /// Adaptive evaluation at the construction point (used by density_u).
  double eval_adaptive() const;

 private:
  double eval_with_panels(double t, const Eigen::VectorXd& x, int panels,
                          bool adaptive_inner) const;

  double t0_;
  Eigen::VectorXd x0_;
  TestFunction phi_;
  ModelParams params_;
  SpaceDecomposition dec_;
  QuadratureSpec spec_;
  std::vector<std::pair<double, double>> nu_segments_;
  std::vector<std::pair<double, double>> lateral_box_;  // per lateral axis
  int panels_ = 4;
  int z_panels_ = 8;
};

}  // namespace membrane
