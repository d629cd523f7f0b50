#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace membrane {

/// Thrown when a panel-doubling integral fails to reach its tolerance
/// within the panel budget. residual is the last refinement change.
struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& msg, double residual_)
      : std::runtime_error(msg + " (residual estimate " +
                           std::to_string(residual_) + ")"),
        residual(residual_) {}
  double residual;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on the
/// Legendre recurrence).
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Cached 16-point rule used by all panel integrators.
const std::vector<double>& gl16_nodes();
const std::vector<double>& gl16_weights();

/// Integral of f over [a, b] with `panels` uniform panels of 16-point
/// Gauss-Legendre each. No adaptivity: the node set is a smooth function of
/// (a, b), which finite-difference callers rely on.
template <class F>
double integrate_panels_fixed(F&& f, double a, double b, int panels) {
  const auto& xs = gl16_nodes();
  const auto& ws = gl16_weights();
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double panel_sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      panel_sum += ws[i] * f(mid + 0.5 * h * xs[i]);
    sum += panel_sum;
  }
  return 0.5 * h * sum;
}

/// Panel-doubling integral of f over [a, b]: 1, 2, 4, ... panels until the
/// refinement change is below max(abs_tol, rel_tol * |I|) or max_panels is
/// exceeded (then throws QuadratureError).
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol,
                          double abs_tol, int max_panels) {
  double prev = integrate_panels_fixed(f, a, b, 1);
  double change = std::abs(prev);
  for (int panels = 2; panels <= max_panels; panels *= 2) {
    const double cur = integrate_panels_fixed(f, a, b, panels);
    change = std::abs(cur - prev);
    if (change <= std::max(abs_tol, rel_tol * std::abs(cur))) return cur;
    prev = cur;
  }
  throw QuadratureError("integrate_adaptive: no convergence within panel budget",
                        change);
}

}  // namespace membrane
