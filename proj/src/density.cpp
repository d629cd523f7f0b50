#include "membrane/density.hpp"

#include <cmath>
#include <stdexcept>

#include "membrane/quadrature.hpp"

namespace membrane {

namespace {

double sgn(double x) { return (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_time(double t, const char* where) {
  if (!(t > 0.0))
    throw std::invalid_argument(std::string(where) + ": t must be > 0");
}

void require_q(double q, const char* where) {
  if (!(std::abs(q) <= 1.0))
    throw std::invalid_argument(std::string(where) + ": |q| must be <= 1");
}

// g^S(t, x + alpha*theta, y) as a function of theta >= 0, with everything
// theta-independent precomputed. Lives on the stack of one evaluation; the
// workspace makes the quadrature loop allocation-free.
struct LateralSlice {
  const Eigen::MatrixXd& L;
  double inv_t;
  double norm_const;
  Eigen::VectorXd r0;
  const Eigen::VectorXd* alpha_b;  // nullptr = no drift shift
  mutable Eigen::VectorXd w;

  LateralSlice(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
               const SpaceDecomposition& dec, bool with_alpha)
      : L(dec.chol_B_S),
        inv_t(1.0 / t),
        alpha_b(with_alpha && dec.alpha_basis.squaredNorm() > 0.0
                    ? &dec.alpha_basis
                    : nullptr),
        w(dec.d - 1) {
    const int k = dec.d - 1;
    const double dnu = y.dot(dec.nu) - x.dot(dec.nu);
    r0 = dec.basis.transpose() * (y - x) - (dnu / dec.sigma2) * dec.b_basis;
    norm_const = std::exp(
        -0.5 * (k * std::log(2.0 * M_PI * t) + dec.log_det_B_S));
  }

  double eval(double theta) const {
    if (alpha_b)
      w = r0 - theta * (*alpha_b);
    else
      w = r0;
    L.triangularView<Eigen::Lower>().solveInPlace(w);
    return norm_const * std::exp(-0.5 * w.squaredNorm() * inv_t);
  }
};

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("QuadratureSpec: tolerances must be > 0");
  if (max_panels < 1)
    throw std::invalid_argument("QuadratureSpec: max_panels must be >= 1");
  if (!(tail_sigmas >= 6.0))
    throw std::invalid_argument("QuadratureSpec: tail_sigmas must be >= 6");
}

double free_density(double t, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& y, const SpaceDecomposition& dec) {
  require_time(t, "free_density");
  Eigen::VectorXd w = y - x;
  dec.chol_B.triangularView<Eigen::Lower>().solveInPlace(w);
  return std::exp(-0.5 * w.squaredNorm() / t -
                  0.5 * (dec.d * std::log(2.0 * M_PI * t) + dec.log_det_B));
}

double lateral_conditional_density(double t, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y,
                                   const SpaceDecomposition& dec) {
  require_time(t, "lateral_conditional_density");
  return LateralSlice(t, x, y, dec, false).eval(0.0);
}

double skew_density(double t, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& y, const SpaceDecomposition& dec,
                    double q) {
  require_time(t, "skew_density");
  require_q(q, "skew_density");
  const double xnu = x.dot(dec.nu), ynu = y.dot(dec.nu);
  const double v = t * dec.sigma2;
  const double diff = ynu - xnu;
  const double a = std::abs(ynu) + std::abs(xnu);
  const double nu_part =
      (std::exp(-diff * diff / (2.0 * v)) +
       q * sgn(ynu) * std::exp(-a * a / (2.0 * v))) /
      std::sqrt(2.0 * M_PI * v);
  return nu_part * LateralSlice(t, x, y, dec, false).eval(0.0);
}

JointDensityValue joint_density(double t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y, double theta,
                                const SpaceDecomposition& dec, double q) {
  require_time(t, "joint_density");
  require_q(q, "joint_density");
  if (theta < 0.0)
    throw std::invalid_argument("joint_density: theta must be >= 0");
  const double xnu = x.dot(dec.nu), ynu = y.dot(dec.nu);
  const double v = t * dec.sigma2;
  const double diff = ynu - xnu;
  const double a = std::abs(ynu) + std::abs(xnu);
  const double gs = LateralSlice(t, x, y, dec, false).eval(0.0);

  JointDensityValue out;
  out.atom = (std::exp(-diff * diff / (2.0 * v)) -
              std::exp(-a * a / (2.0 * v))) /
             std::sqrt(2.0 * M_PI * v) * gs;
  const double zc = dec.sigma2 * theta + a;
  out.continuous = (1.0 + q * sgn(ynu)) * zc /
                   std::sqrt(2.0 * M_PI * t * t * t * dec.sigma2) *
                   std::exp(-zc * zc / (2.0 * v)) * gs;
  return out;
}

namespace {

// Shared by the adaptive and fixed-rule entry points.
template <class Integrate>
double transition_density_impl(double t, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y,
                               const ModelParams& params,
                               const SpaceDecomposition& dec,
                               double tail_sigmas, Integrate&& integrate) {
  require_time(t, "transition_density");
  require_q(params.q, "transition_density");
  const double xnu = x.dot(dec.nu), ynu = y.dot(dec.nu);
  const double v = t * dec.sigma2;
  const double diff = ynu - xnu;
  const double a = std::abs(ynu) + std::abs(xnu);

  const double atom = (std::exp(-diff * diff / (2.0 * v)) -
                       std::exp(-a * a / (2.0 * v))) /
                      std::sqrt(2.0 * M_PI * v) *
                      LateralSlice(t, x, y, dec, false).eval(0.0);

  const double coef = params.q * sgn(ynu) + 1.0;
  if (coef == 0.0) return atom;

  const LateralSlice slice(t, x, y, dec, true);
  const double sigma = std::sqrt(dec.sigma2);
  const double z_hi = a + tail_sigmas * sigma * std::sqrt(t);
  const double den = 1.0 / std::sqrt(2.0 * M_PI * t * t * t * dec.sigma2);
  const auto f = [&](double z) {
    return z * std::exp(-z * z / (2.0 * v)) *
           slice.eval((z - a) / dec.sigma2);
  };
  return atom + coef * den / dec.sigma2 * integrate(f, a, z_hi);
}

}  // namespace

double transition_density(double t, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, const ModelParams& params,
                          const SpaceDecomposition& dec,
                          const QuadratureSpec& quad) {
  quad.validate();
  return transition_density_impl(
      t, x, y, params, dec, quad.tail_sigmas, [&](auto&& f, double a, double b) {
        return integrate_adaptive(f, a, b, quad.rel_tol, quad.abs_tol,
                                  quad.max_panels);
      });
}

double transition_density_fixed(double t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y,
                                const ModelParams& params,
                                const SpaceDecomposition& dec, int z_panels,
                                double tail_sigmas) {
  if (z_panels < 1)
    throw std::invalid_argument("transition_density_fixed: z_panels must be >= 1");
  return transition_density_impl(
      t, x, y, params, dec, tail_sigmas, [&](auto&& f, double a, double b) {
        return integrate_panels_fixed(f, a, b, z_panels);
      });
}

UIntegrator::UIntegrator(double t, const Eigen::VectorXd& x, TestFunction phi,
                         const ModelParams& params,
                         const SpaceDecomposition& dec,
                         const QuadratureSpec& spec, double pad)
    : t0_(t), x0_(x), phi_(std::move(phi)), params_(params), dec_(dec),
      spec_(spec) {
  require_time(t, "density_u");
  spec_.validate();
  if (!phi_.f) throw std::invalid_argument("density_u: test function has no callable");
  if (!(std::isfinite(phi_.sup_norm)) || !(phi_.sup_norm > 0.0))
    throw std::invalid_argument(
        "density_u: test function without a finite decay bound");
  if (phi_.center.size() == 0) phi_.center = Eigen::VectorXd::Zero(dec.d);
  if (phi_.center.size() != dec.d)
    throw std::invalid_argument("density_u: test function center has wrong dimension");

  const double sigma = std::sqrt(dec_.sigma2);
  const double w = spec_.tail_sigmas * sigma * std::sqrt(t) + pad;
  const double xnu = x.dot(dec_.nu);
  const double cnu = phi_.center.dot(dec_.nu);
  const double r = phi_.support_radius;

  // nu-axis: the direct Gaussian lives within w of x_nu; the reflected part
  // within (w - |x_nu|) of the membrane. Merge, clip to the support of phi,
  // split at the |y_nu| kink on S.
  double lo = xnu - w, hi = xnu + w;
  const double m = w - std::abs(xnu);
  if (m > 0.0) {
    lo = std::min(lo, -m);
    hi = std::max(hi, m);
  }
  if (std::isfinite(r)) {
    lo = std::max(lo, cnu - r);
    hi = std::min(hi, cnu + r);
  }
  if (lo < hi) {
    if (lo < 0.0 && hi > 0.0) {
      nu_segments_.push_back({lo, 0.0});
      nu_segments_.push_back({0.0, hi});
    } else {
      nu_segments_.push_back({lo, hi});
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dec_.B_S);
  const double lat_sd = std::sqrt(t * es.eigenvalues().maxCoeff());
  const double nu_extent =
      std::max(std::abs(lo - xnu), std::abs(hi - xnu));
  const double theta_max = spec_.tail_sigmas * sigma * std::sqrt(t) / dec_.sigma2;
  const Eigen::VectorXd x_b = dec_.basis.transpose() * x;
  const Eigen::VectorXd c_b = dec_.basis.transpose() * phi_.center;
  for (int j = 0; j < dec_.d - 1; ++j) {
    const double width = spec_.tail_sigmas * lat_sd +
                         std::abs(dec_.b_basis[j]) / dec_.sigma2 * nu_extent +
                         std::abs(dec_.alpha_basis[j]) * theta_max + pad;
    double l = x_b[j] - width, h = x_b[j] + width;
    if (std::isfinite(r)) {
      l = std::max(l, c_b[j] - r);
      h = std::min(h, c_b[j] + r);
    }
    lateral_box_.push_back({l, h});
  }
}

double UIntegrator::eval_with_panels(double t, const Eigen::VectorXd& x,
                                     int panels, bool adaptive_inner) const {
  if (nu_segments_.empty()) return 0.0;
  for (const auto& [l, h] : lateral_box_)
    if (!(l < h)) return 0.0;

  const auto& gx = gl16_nodes();
  const auto& gw = gl16_weights();
  const int n16 = static_cast<int>(gx.size());

  auto axis_nodes = [&](const std::vector<std::pair<double, double>>& segs) {
    std::vector<std::pair<double, double>> nw;
    for (const auto& [a, b] : segs) {
      const double h = (b - a) / panels;
      for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int i = 0; i < n16; ++i)
          nw.emplace_back(mid + 0.5 * h * gx[i], 0.5 * h * gw[i]);
      }
    }
    return nw;
  };

  const auto nu_nodes = axis_nodes(nu_segments_);
  std::vector<std::vector<std::pair<double, double>>> lat_nodes;
  for (const auto& seg : lateral_box_)
    lat_nodes.push_back(axis_nodes({seg}));

  const int k = dec_.d - 1;
  std::size_t lat_total = 1;
  for (const auto& ln : lat_nodes) lat_total *= ln.size();

  Eigen::VectorXd y(dec_.d);
  double sum = 0.0;
  for (const auto& [ynu, wnu] : nu_nodes) {
    for (std::size_t flat = 0; flat < lat_total; ++flat) {
      y = ynu * dec_.nu;
      double wgt = wnu;
      std::size_t rem = flat;
      for (int j = 0; j < k; ++j) {
        const auto& [c, wj] = lat_nodes[j][rem % lat_nodes[j].size()];
        rem /= lat_nodes[j].size();
        y += c * dec_.basis.col(j);
        wgt *= wj;
      }
      const double g =
          adaptive_inner
              ? transition_density(t, x, y, params_, dec_, spec_)
              : transition_density_fixed(t, x, y, params_, dec_, z_panels_,
                                         spec_.tail_sigmas);
      sum += wgt * phi_.f(y) * g;
    }
  }
  return sum;
}

void UIntegrator::calibrate() {
  double prev = eval_with_panels(t0_, x0_, 1, false);
  double change = std::abs(prev);
  for (int p = 2; p <= spec_.max_panels; p *= 2) {
    const double cur = eval_with_panels(t0_, x0_, p, false);
    change = std::abs(cur - prev);
    if (change <= std::max(spec_.abs_tol, spec_.rel_tol * std::abs(cur))) {
      panels_ = p;
      return;
    }
    prev = cur;
  }
  throw QuadratureError("UIntegrator::calibrate: no convergence", change);
}

double UIntegrator::eval(double t, const Eigen::VectorXd& x) const {
  return eval_with_panels(t, x, panels_, false);
}

double UIntegrator::eval_adaptive() const {
  double prev = eval_with_panels(t0_, x0_, 1, true);
  double change = std::abs(prev);
  for (int p = 2; p <= spec_.max_panels; p *= 2) {
    const double cur = eval_with_panels(t0_, x0_, p, true);
    change = std::abs(cur - prev);
    if (change <= std::max(spec_.abs_tol, spec_.rel_tol * std::abs(cur)))
      return cur;
    prev = cur;
  }
  throw QuadratureError("density_u: no convergence within panel budget", change);
}

double density_u(double t, const Eigen::VectorXd& x, const TestFunction& phi,
                 const ModelParams& params, const SpaceDecomposition& dec,
                 const QuadratureSpec& quad) {
  UIntegrator u(t, x, phi, params, dec, quad);
  return u.eval_adaptive();
}

}  // namespace membrane
