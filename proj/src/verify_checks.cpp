#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "membrane/density.hpp"
#include "membrane/quadrature.hpp"
#include "membrane/verify.hpp"
#include "verify_internal.hpp"

namespace membrane {

namespace detail {

nlohmann::json model_json(const ModelParams& p) {
  std::vector<double> b;
  b.reserve(p.d * p.d);
  for (int i = 0; i < p.d; ++i)
    for (int j = 0; j < p.d; ++j) b.push_back(p.B(i, j));
  return nlohmann::json{
      {"d", p.d},
      {"B", b},
      {"nu", std::vector<double>(p.nu.data(), p.nu.data() + p.d)},
      {"alpha", std::vector<double>(p.alpha.data(), p.alpha.data() + p.d)},
      {"q", p.q}};
}

TestFunction gaussian_bump(const SpaceDecomposition& dec) {
  Eigen::VectorXd c = 0.2 * dec.basis.col(0) + 0.1 * dec.nu;
  TestFunction phi;
  phi.f = [c](const Eigen::VectorXd& y) {
    return std::exp(-0.5 * (y - c).squaredNorm());
  };
  phi.sup_norm = 1.0;
  phi.center = c;
  return phi;
}

QuadratureSpec pde_quadrature_spec() {
  QuadratureSpec spec;
  spec.rel_tol = 1e-9;
  spec.abs_tol = 1e-12;
  return spec;
}

}  // namespace detail

namespace {

using Clock = std::chrono::steady_clock;
using detail::gaussian_bump;
using detail::model_json;

std::int64_t ms_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               t0)
      .count();
}

std::vector<double> vec(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// Heat residual |du/dt - Tr(B D^2 u)/2| at step h, on a frozen quadrature
// rule so the rule's own error cancels in the differences.
double heat_residual(const UIntegrator& u, double t, const Eigen::VectorXd& x,
                     const Eigen::MatrixXd& B, double h) {
  const int d = static_cast<int>(x.size());
  const double ut = (u.eval(t + h, x) - u.eval(t - h, x)) / (2.0 * h);
  const double u0 = u.eval(t, x);
  double trace = 0.0;
  Eigen::VectorXd xp = x, xm = x;
  for (int i = 0; i < d; ++i) {
    xp = x;
    xm = x;
    xp[i] += h;
    xm[i] -= h;
    trace += B(i, i) * (u.eval(t, xp) - 2.0 * u0 + u.eval(t, xm)) / (h * h);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Eigen::VectorXd a = x, bb = x, c = x, e = x;
      a[i] += h;
      a[j] += h;
      bb[i] += h;
      bb[j] -= h;
      c[i] -= h;
      c[j] += h;
      e[i] -= h;
      e[j] -= h;
      const double uij = (u.eval(t, a) - u.eval(t, bb) - u.eval(t, c) +
                          u.eval(t, e)) /
                         (4.0 * h * h);
      trace += 2.0 * B(i, j) * uij;
    }
  return std::abs(ut - 0.5 * trace);
}

UIntegrator calibrated_u(double t, const Eigen::VectorXd& x,
                         const ModelParams& params,
                         const SpaceDecomposition& dec, double pad) {
  UIntegrator u(t, x, gaussian_bump(dec), params, dec,
                detail::pde_quadrature_spec(), pad);
  u.calibrate();
  return u;
}

}  // namespace

CheckReport check_heat_equation(double t, const Eigen::VectorXd& x,
                                const ModelParams& params) {
  const auto t0 = Clock::now();
  params.validate();
  const SpaceDecomposition dec = build_decomposition(params);
  const std::vector<double> hs = {4e-3, 2e-3, 1e-3};
  if (std::abs(x.dot(dec.nu)) <= 3.0 * hs.front())
    throw std::invalid_argument("check_heat_equation: x too close to S");

  const UIntegrator u = calibrated_u(t, x, params, dec, 0.1);
  std::vector<double> res;
  for (double h : hs) res.push_back(heat_residual(u, t, x, params.B, h));
  const double slope = (std::log(res.front()) - std::log(res.back())) /
                       (std::log(hs.front()) - std::log(hs.back()));

  CheckReport r;
  r.check_id = "heat-equation-order";
  r.params = {{"model", model_json(params)}, {"t", t},       {"x", vec(x)},
              {"h", hs},                     {"residuals", res}};
  r.statistic = slope;
  r.threshold = 1.7;
  r.passed = std::isfinite(slope) && slope >= 1.7;
  r.runtime_ms = ms_since(t0);
  return r;
}

CheckReport check_heat_equation_residual(double t, const Eigen::VectorXd& x,
                                         const ModelParams& params,
                                         double threshold) {
  const auto t0 = Clock::now();
  params.validate();
  const SpaceDecomposition dec = build_decomposition(params);
  const double h = 1e-3;
  if (std::abs(x.dot(dec.nu)) <= 3.0 * h)
    throw std::invalid_argument("check_heat_equation: x too close to S");
  const UIntegrator u = calibrated_u(t, x, params, dec, 0.05);
  const double res = heat_residual(u, t, x, params.B, h);

  CheckReport r;
  r.check_id = "heat-equation-residual";
  r.params = {{"model", model_json(params)}, {"t", t}, {"x", vec(x)}, {"h", h}};
  r.statistic = res;
  r.threshold = threshold;
  r.passed = res < threshold;
  r.runtime_ms = ms_since(t0);
  return r;
}

CheckReport check_continuity(double t, const Eigen::VectorXd& x,
                             const ModelParams& params) {
  const auto t0 = Clock::now();
  params.validate();
  const SpaceDecomposition dec = build_decomposition(params);
  if (std::abs(x.dot(dec.nu)) > 1e-12)
    throw std::invalid_argument("check_continuity: x must lie on S");
  const UIntegrator u = calibrated_u(t, x, params, dec, 0.05);

  const std::vector<double> eps = {1e-2, 1e-3, 1e-4};
  std::vector<double> jump;
  for (double e : eps)
    jump.push_back(u.eval(t, x + e * dec.nu) - u.eval(t, x - e * dec.nu));
  // The one-sided derivatives differ, so jump(eps) ~ c * eps; extrapolate
  // the two smallest to eps = 0.
  const double j0 =
      jump[2] - eps[2] * (jump[1] - jump[2]) / (eps[1] - eps[2]);

  CheckReport r;
  r.check_id = "continuity-jump";
  r.params = {{"model", model_json(params)},
              {"t", t},
              {"x", vec(x)},
              {"eps", eps},
              {"jumps", jump}};
  r.statistic = std::abs(j0);
  r.threshold = 1e-6;
  r.passed = r.statistic < r.threshold;
  r.runtime_ms = ms_since(t0);
  return r;
}

CheckReport check_flux(double t, const Eigen::VectorXd& x,
                       const ModelParams& params) {
  const auto t0 = Clock::now();
  params.validate();
  const SpaceDecomposition dec = build_decomposition(params);
  if (std::abs(x.dot(dec.nu)) > 1e-12)
    throw std::invalid_argument("check_flux: x must lie on S");
  const UIntegrator u = calibrated_u(t, x, params, dec, 0.1);

  // Tangential gradient is smooth across S; centered differences at x.
  const double hl = 1e-3;
  double b_dot = 0.0, a_dot = 0.0;
  for (int j = 0; j < dec.d - 1; ++j) {
    const Eigen::VectorXd ej = dec.basis.col(j);
    const double gj =
        (u.eval(t, x + hl * ej) - u.eval(t, x - hl * ej)) / (2.0 * hl);
    b_dot += dec.b_basis[j] * gj;
    a_dot += dec.alpha_basis[j] * gj;
  }

  // One-sided nu-derivatives from offsets {eps, 2 eps, 3 eps} (order 2,
  // no node on S itself); dN u = sigma^2 d_nu u + (b, grad_S u).
  const auto d_plus = [&](double e) {
    return (-2.5 * u.eval(t, x + e * dec.nu) +
            4.0 * u.eval(t, x + 2.0 * e * dec.nu) -
            1.5 * u.eval(t, x + 3.0 * e * dec.nu)) /
           e;
  };
  const auto d_minus = [&](double e) {
    return (2.5 * u.eval(t, x - e * dec.nu) -
            4.0 * u.eval(t, x - 2.0 * e * dec.nu) +
            1.5 * u.eval(t, x - 3.0 * e * dec.nu)) /
           e;
  };
  const auto flux_residual = [&](double e) {
    const double dn_plus = dec.sigma2 * d_plus(e) + b_dot;
    const double dn_minus = dec.sigma2 * d_minus(e) + b_dot;
    return 0.5 * (1.0 + params.q) * dn_plus -
           0.5 * (1.0 - params.q) * dn_minus + a_dot;
  };

  const std::vector<double> eps = {2e-2, 1e-2, 5e-3};
  std::vector<double> res;
  for (double e : eps) res.push_back(flux_residual(e));
  // Stencil is order 2: R(eps) = R0 + c eps^2; Richardson on the two finest.
  const double r0 = (4.0 * res[2] - res[1]) / 3.0;

  CheckReport r;
  r.check_id = "flux-condition";
  r.params = {{"model", model_json(params)},
              {"t", t},
              {"x", vec(x)},
              {"eps", eps},
              {"residuals", res}};
  r.statistic = std::abs(r0);
  r.threshold = 1e-5;
  r.passed = r.statistic < r.threshold;
  r.runtime_ms = ms_since(t0);
  return r;
}

CheckReport check_chapman_kolmogorov(double s, double t,
                                     const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y,
                                     const ModelParams& params) {
  const auto t0 = Clock::now();
  params.validate();
  if (params.d != 2)
    throw std::invalid_argument(
        "check_chapman_kolmogorov: quadrature variant needs d = 2");
  if (!(s > 0.0) || !(t > 0.0))
    throw std::invalid_argument("check_chapman_kolmogorov: s, t must be > 0");
  const SpaceDecomposition dec = build_decomposition(params);
  const double sigma = std::sqrt(dec.sigma2);
  const double tail = 10.0;

  const double xnu = x.dot(dec.nu), ynu = y.dot(dec.nu);
  // The product of the two kernels is negligible outside the tighter of the
  // two reach bounds on the nu-axis.
  const double R = std::min(std::abs(xnu) + tail * sigma * std::sqrt(s),
                            std::abs(ynu) + tail * sigma * std::sqrt(t));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dec.B_S);
  const double lmax = es.eigenvalues().maxCoeff();
  const double xb = (dec.basis.transpose() * x)[0];
  const double yb = (dec.basis.transpose() * y)[0];
  const double drift = dec.alpha_basis.size() ? std::abs(dec.alpha_basis[0]) : 0.0;
  const double bshift = std::abs(dec.b_basis[0]) / dec.sigma2;
  const double wx = tail * std::sqrt(s * lmax) + bshift * (std::abs(xnu) + R) +
                    drift * tail * sigma * std::sqrt(s) / dec.sigma2;
  const double wy = tail * std::sqrt(t * lmax) + bshift * (std::abs(ynu) + R) +
                    drift * tail * sigma * std::sqrt(t) / dec.sigma2;
  const double lat_lo = std::min(xb - wx, yb - wy);
  const double lat_hi = std::max(xb + wx, yb + wy);

  const auto& gx = gl16_nodes();
  const auto& gw = gl16_weights();
  const int z_panels = 8;

  const auto eval_with = [&](int p) {
    std::vector<std::pair<double, double>> nu_nodes, lat_nodes;
    const auto fill = [&](std::vector<std::pair<double, double>>& nw, double a,
                          double b) {
      const double h = (b - a) / p;
      for (int i = 0; i < p; ++i) {
        const double mid = a + (i + 0.5) * h;
        for (std::size_t k = 0; k < gx.size(); ++k)
          nw.emplace_back(mid + 0.5 * h * gx[k], 0.5 * h * gw[k]);
      }
    };
    fill(nu_nodes, -R, 0.0);
    fill(nu_nodes, 0.0, R);
    fill(lat_nodes, lat_lo, lat_hi);
    double sum = 0.0;
    Eigen::VectorXd z(2);
    for (const auto& [znu, wnu] : nu_nodes)
      for (const auto& [zl, wl] : lat_nodes) {
        z = znu * dec.nu + zl * dec.basis.col(0);
        sum += wnu * wl *
               transition_density_fixed(s, x, z, params, dec, z_panels) *
               transition_density_fixed(t, z, y, params, dec, z_panels);
      }
    return sum;
  };

  double conv = eval_with(2);
  double change = std::abs(conv);
  for (int p = 4; p <= 32; p *= 2) {
    const double cur = eval_with(p);
    change = std::abs(cur - conv);
    conv = cur;
    if (change <= std::max(1e-8, 1e-6 * std::abs(cur))) break;
  }

  const double ref = transition_density(s + t, x, y, params, dec);

  CheckReport r;
  r.check_id = "chapman-kolmogorov";
  r.params = {{"model", model_json(params)}, {"s", s},      {"t", t},
              {"x", vec(x)},                 {"y", vec(y)}, {"quad_change", change}};
  r.statistic = std::abs(conv - ref);
  r.threshold = 1e-4;
  r.passed = r.statistic < r.threshold;
  r.runtime_ms = ms_since(t0);
  return r;
}

namespace {

using Complex = std::complex<double>;

// Shared quadrature pieces of the characteristic-function identity. All
// phases carry kappa = mu_nu + (b, mu_S)/sigma^2 because the lateral mean
// moves with the nu-endpoint.
struct CfWorkspace {
  double sigma2, sigma, q;
  double kappa;
  double lat_quad;  // (B_S mu_b, mu_b)
  const std::vector<double>& gx = gl16_nodes();
  const std::vector<double>& gw = gl16_weights();

  double lat_cf(double s) const { return std::exp(-0.5 * s * lat_quad); }

  // 1-D integral of exp(i kappa y) * f(y) over [a, b] with p panels.
  template <class F>
  Complex line(F&& f, double a, double b, int p) const {
    Complex sum = 0.0;
    const double h = (b - a) / p;
    for (int i = 0; i < p; ++i) {
      const double mid = a + (i + 0.5) * h;
      for (std::size_t k = 0; k < gx.size(); ++k) {
        const double ynu = mid + 0.5 * h * gx[k];
        sum += 0.5 * h * gw[k] * std::polar(f(ynu), kappa * ynu);
      }
    }
    return sum;
  }

  // Joint (y_nu, theta) transform of the hit part started at x_nu:
  // integral of exp(i kappa y + i lambda theta) (1 + q sgn y) rho(theta, |y|).
  Complex hit_transform(double s, double xnu, double lambda, int p) const {
    const double v = s * sigma2;
    const double w = 10.0 * sigma * std::sqrt(s);
    const double den = 1.0 / std::sqrt(2.0 * M_PI * s * s * s * sigma2);
    const double th_hi = w / sigma2;
    Complex sum = 0.0;
    const double hth = th_hi / p;
    for (int i = 0; i < p; ++i) {
      const double midt = (i + 0.5) * hth;
      for (std::size_t kt = 0; kt < gx.size(); ++kt) {
        const double theta = midt + 0.5 * hth * gx[kt];
        const double wt = 0.5 * hth * gw[kt];
        for (int side = -1; side <= 1; side += 2) {
          const double hy = w / p;
          for (int iy = 0; iy < p; ++iy) {
            const double midy = (iy + 0.5) * hy;
            for (std::size_t ky = 0; ky < gx.size(); ++ky) {
              const double m = midy + 0.5 * hy * gx[ky];
              const double wy = 0.5 * hy * gw[ky];
              const double zc = sigma2 * theta + std::abs(xnu) + m;
              const double rho = (1.0 + q * side) * zc * den *
                                 std::exp(-zc * zc / (2.0 * v));
              sum += wt * wy *
                     std::polar(rho, kappa * side * m + lambda * theta);
            }
          }
        }
      }
    }
    return sum;
  }
};

}  // namespace

CheckReport check_integral_equation(double t, const Eigen::VectorXd& x,
                                    double lambda, const Eigen::VectorXd& mu,
                                    const ModelParams& params,
                                    double threshold) {
  const auto t0 = Clock::now();
  params.validate();
  if (params.alpha.norm() > 0.0)
    throw std::invalid_argument(
        "check_integral_equation: stated for the skew process (alpha = 0)");
  if (!(t > 0.0))
    throw std::invalid_argument("check_integral_equation: t must be > 0");
  const SpaceDecomposition dec = build_decomposition(params);

  CfWorkspace ws{dec.sigma2, std::sqrt(dec.sigma2), params.q, 0.0, 0.0};
  const Eigen::VectorXd mu_b = dec.basis.transpose() * mu;
  const double mu_nu = mu.dot(dec.nu);
  const double kappa_b = dec.b_basis.dot(mu_b) / dec.sigma2;
  ws.kappa = mu_nu + kappa_b;
  ws.lat_quad = mu_b.dot(dec.B_S * mu_b);

  const double xnu = x.dot(dec.nu);
  const Eigen::VectorXd x_b = dec.basis.transpose() * x;
  const double phase0 = x_b.dot(mu_b) - xnu * kappa_b;
  const double v = t * dec.sigma2;
  const double w = 10.0 * ws.sigma * std::sqrt(t);

  // One-dimensional nu-densities of the atom and of the skew kernel.
  const auto atom_nu = [&](double ynu) {
    const double diff = ynu - xnu;
    const double a = std::abs(ynu) + std::abs(xnu);
    return (std::exp(-diff * diff / (2.0 * v)) -
            std::exp(-a * a / (2.0 * v))) /
           std::sqrt(2.0 * M_PI * v);
  };
  const auto skew_nu = [&](double ynu) {
    const double diff = ynu - xnu;
    const double a = std::abs(ynu) + std::abs(xnu);
    const double sg = (ynu > 0.0) ? 1.0 : (ynu < 0.0 ? -1.0 : 0.0);
    return (std::exp(-diff * diff / (2.0 * v)) +
            params.q * sg * std::exp(-a * a / (2.0 * v))) /
           std::sqrt(2.0 * M_PI * v);
  };
  const double lo = std::min(xnu - w, -w), hi = std::max(xnu + w, w);

  const auto lhs_at = [&](int p) {
    const Complex inner = ws.line(atom_nu, lo, 0.0, p) +
                          ws.line(atom_nu, 0.0, hi, p) +
                          ws.hit_transform(t, xnu, lambda, p);
    return std::polar(ws.lat_cf(t), phase0) * inner;
  };

  const auto rhs_at = [&](int p) {
    const Complex cf_skew = std::polar(ws.lat_cf(t), phase0) *
                            (ws.line(skew_nu, lo, 0.0, p) +
                             ws.line(skew_nu, 0.0, hi, p));
    if (lambda == 0.0) return cf_skew;
    // Membrane term: the S-integral collapses by translation invariance
    // along S, leaving a time convolution against u started on S. Square
    // root substitutions absorb the endpoint concentrations at both ends.
    const auto tau_integrand = [&](double tau) {
      const double s_rem = t - tau;
      const Complex u0 = ws.lat_cf(s_rem) *
                         ws.hit_transform(s_rem, 0.0, lambda, p);
      const double knu = std::exp(-xnu * xnu / (2.0 * tau * dec.sigma2)) /
                         std::sqrt(2.0 * M_PI * tau * dec.sigma2);
      return ws.lat_cf(tau) * knu * u0;
    };
    Complex conv = 0.0;
    const double xi_hi = std::sqrt(0.5 * t);
    const double h = xi_hi / p;
    for (int i = 0; i < p; ++i) {
      const double mid = (i + 0.5) * h;
      for (std::size_t k = 0; k < ws.gx.size(); ++k) {
        const double xi = mid + 0.5 * h * ws.gx[k];
        const double wk = 0.5 * h * ws.gw[k] * 2.0 * xi;
        conv += wk * (tau_integrand(xi * xi) + tau_integrand(t - xi * xi));
      }
    }
    return cf_skew + Complex(0.0, lambda) * std::polar(1.0, phase0) * conv;
  };

  const auto converge = [&](const auto& f) {
    Complex prev = f(2);
    double change = std::abs(prev);
    for (int p = 4; p <= 32; p *= 2) {
      const Complex cur = f(p);
      change = std::abs(cur - prev);
      prev = cur;
      if (change <= std::max(1e-10, 1e-7 * std::abs(cur))) break;
    }
    return prev;
  };

  const Complex lhs = converge(lhs_at);
  const Complex rhs = converge(rhs_at);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});

  CheckReport r;
  r.check_id = "integral-equation";
  r.params = {{"model", model_json(params)},
              {"t", t},
              {"x", vec(x)},
              {"lambda", lambda},
              {"mu", vec(mu)},
              {"lhs", {lhs.real(), lhs.imag()}},
              {"rhs", {rhs.real(), rhs.imag()}}};
  r.statistic = std::abs(lhs - rhs) / scale;
  r.threshold = threshold;
  r.passed = r.statistic < r.threshold;
  r.runtime_ms = ms_since(t0);
  return r;
}

}  // namespace membrane
