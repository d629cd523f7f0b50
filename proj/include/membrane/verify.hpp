#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "membrane/geometry.hpp"
#include "membrane/rng.hpp"

namespace membrane {

/// Outcome of one verification check. runtime_ms appears in the summary
/// table only; the JSONL serialization excludes it so reruns with the same
/// seed are byte-identical.
struct CheckReport {
  std::string check_id;
  nlohmann::json params;  // model + (t, x, tolerances, significance, n, seed)
  double statistic = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::int64_t runtime_ms = 0;
};

nlohmann::json report_to_json(const CheckReport& r);
CheckReport report_from_json(const nlohmann::json& j);
std::string reports_to_jsonl(const std::vector<CheckReport>& reports);
std::string summary_table(const std::vector<CheckReport>& reports);

/// Lattice-walk oracle configuration. dx is the requested step on the
/// nu-axis (shrunk so the step count divides t exactly); calibration is the
/// measured scale factor mapping visit counts at 0 to local time, fixed once
/// against the q = 0 closed form and then frozen.
struct OracleConfig {
  double dx = 0.01;
  std::int64_t n_steps = 0;  // 0 = derive from (t, dx); else must match
  int n_paths = 10000;
  double calibration = 1.0;

  void validate() const;
};

/// Empirical joint sample of (endpoint, eta) from the skewed lattice walk.
struct OracleSamples {
  std::vector<double> y_nu;
  Eigen::MatrixXd endpoints;  // n_paths x d
  std::vector<double> eta;
  std::int64_t n_steps = 0;
  double dx_effective = 0.0;
};

OracleSamples oracle_walk(const ModelParams& params, const OracleConfig& cfg,
                          double t, const Eigen::VectorXd& x0, RngState rng);

// Residual checks of the transmission problem, all on u(t, x, phi) with a
// fixed smooth Gaussian bump phi.

/// |du/dt - Tr(B D^2 u)/2| off the membrane, measured at h in
/// {4e-3, 2e-3, 1e-3}; statistic = observed convergence order (log-log
/// slope), passes when >= 1.7.
CheckReport check_heat_equation(double t, const Eigen::VectorXd& x,
                                const ModelParams& params);

/// Same residual at the finest step only; statistic = residual itself
/// (used for the exact-kernel q = 0, alpha = 0 case).
CheckReport check_heat_equation_residual(double t, const Eigen::VectorXd& x,
                                         const ModelParams& params,
                                         double threshold);

/// u(t, x + eps nu) - u(t, x - eps nu) for eps in {1e-2, 1e-3, 1e-4},
/// linearly extrapolated to eps = 0; statistic = |extrapolated jump|.
CheckReport check_continuity(double t, const Eigen::VectorXd& x,
                             const ModelParams& params);

/// Conormal flux residual
/// (1+q)/2 dN u(x+) - (1-q)/2 dN u(x-) + (alpha, grad u), one-sided 3-point
/// stencils along nu, Richardson-extrapolated in eps; statistic = |R(0)|.
CheckReport check_flux(double t, const Eigen::VectorXd& x,
                       const ModelParams& params);

/// Both sides of the characteristic-function integral equation for the skew
/// process (alpha must be 0); statistic = relative two-sided disagreement.
CheckReport check_integral_equation(double t, const Eigen::VectorXd& x,
                                    double lambda, const Eigen::VectorXd& mu,
                                    const ModelParams& params,
                                    double threshold = 1e-4);

/// | integral G(s,x,z) G(t,z,y) dz - G(s+t,x,y) | by tensor quadrature
/// over z (d = 2 only).
CheckReport check_chapman_kolmogorov(double s, double t,
                                     const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y,
                                     const ModelParams& params);

/// Suite runner. Valid ids: reductions, pde, lemma1, semigroup,
/// sampler-vs-density, oracle, or "all". Reports come back in a fixed
/// enumeration order; any failure is visible via all_passed().
struct SuiteConfig {
  std::uint64_t seed = 42;
  int n_samples = 100000;     // statistical checks
  int n_paths_oracle = 10000; // lattice-walk oracle
};

const std::vector<std::string>& suite_ids();
std::vector<CheckReport> run_suite(const std::string& suite_id,
                                   const SuiteConfig& cfg = {});
bool all_passed(const std::vector<CheckReport>& reports);

}  // namespace membrane
