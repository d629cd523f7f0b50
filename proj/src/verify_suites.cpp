#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <type_traits>

#include "membrane/density.hpp"
#include "membrane/kernels.hpp"
#include "membrane/quadrature.hpp"
#include "membrane/sampler.hpp"
#include "membrane/special.hpp"
#include "membrane/stats.hpp"
#include "membrane/verify.hpp"
#include "verify_internal.hpp"

namespace membrane {

namespace {

using Clock = std::chrono::steady_clock;
using detail::model_json;

std::int64_t ms_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               t0)
      .count();
}

Eigen::MatrixXd b_matrix(int b_id) {
  if (b_id == 0) return Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  return m;
}

ModelParams cell_model(double q, double alpha1, int b_id) {
  ModelParams p;
  p.d = 2;
  p.B = b_matrix(b_id);
  p.nu = Eigen::Vector2d(0.0, 1.0);
  p.q = q;
  p.alpha = Eigen::Vector2d(alpha1, 0.0);
  return p;
}

struct Cell {
  double q, alpha1;
  int b_id;
  double t, xnu;
};

// Hard-coded default grid: boundary and generic values of every parameter.
std::vector<Cell> default_grid() {
  std::vector<Cell> cells;
  for (double q : {-1.0, -0.5, 0.0, 0.5, 1.0})
    for (double a : {0.0, 0.8})
      for (int b : {0, 1})
        for (double t : {0.25, 1.0})
          for (double xnu : {0.0, 0.5})
            cells.push_back({q, a, b, t, xnu});
  return cells;
}

std::string cell_tag(const Cell& c) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "q=%g,a=%g,B=%s,t=%g,xnu=%g", c.q, c.alpha1,
                c.b_id == 0 ? "I" : "M", c.t, c.xnu);
  return buf;
}

struct Task {
  std::function<std::vector<CheckReport>()> run;

  template <class F>
  Task(F f) : run(wrap(std::move(f))) {}

 private:
  template <class F>
  static std::function<std::vector<CheckReport>()> wrap(F f) {
    if constexpr (std::is_same_v<std::invoke_result_t<F>, CheckReport>)
      return [f = std::move(f)]() { return std::vector<CheckReport>{f()}; };
    else
      return f;
  }
};

std::vector<CheckReport> run_tasks(const std::vector<Task>& tasks) {
  std::vector<std::vector<CheckReport>> results(tasks.size());
  const std::int64_t n = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      results[i] = tasks[i].run();
    } catch (const std::exception& e) {
      CheckReport r;
      r.check_id = "task-error";
      r.params = {{"error", e.what()}};
      r.statistic = std::numeric_limits<double>::quiet_NaN();
      r.passed = false;
      results[i] = {r};
    }
  }
  std::vector<CheckReport> out;
  for (auto& part : results)
    for (auto& r : part) out.push_back(std::move(r));
  return out;
}

CheckReport make_report(const std::string& id, nlohmann::json params,
                        double statistic, double threshold, bool passed,
                        Clock::time_point t0) {
  CheckReport r;
  r.check_id = id;
  r.params = std::move(params);
  r.statistic = statistic;
  r.threshold = threshold;
  r.passed = passed;
  r.runtime_ms = ms_since(t0);
  return r;
}

// ---------------------------------------------------------------------------
// reductions: closed-form limits, positivity and normalization of G.

std::vector<Task> reductions_tasks(const SuiteConfig&) {
  std::vector<Task> tasks;
  for (const Cell& c : default_grid()) {
    tasks.push_back({[c]() {
      const auto t0 = Clock::now();
      const ModelParams params = cell_model(c.q, c.alpha1, c.b_id);
      const SpaceDecomposition dec = build_decomposition(params);
      const Eigen::Vector2d x(0.0, c.xnu);

      QuadratureSpec uspec;
      uspec.rel_tol = 1e-7;
      uspec.abs_tol = 1e-9;
      TestFunction one;
      one.f = [](const Eigen::VectorXd&) { return 1.0; };
      const double norm = density_u(c.t, x, one, params, dec, uspec);
      return make_report("reductions/normalization/" + cell_tag(c),
                         {{"model", model_json(params)},
                          {"t", c.t},
                          {"x", {x[0], x[1]}}},
                         std::abs(norm - 1.0), 1e-6,
                         std::abs(norm - 1.0) < 1e-6, t0);
    }});

    tasks.push_back({[c]() {
      const auto t0 = Clock::now();
      const ModelParams params = cell_model(c.q, c.alpha1, c.b_id);
      const SpaceDecomposition dec = build_decomposition(params);
      const Eigen::Vector2d x(0.0, c.xnu);
      const double sigma = std::sqrt(dec.sigma2);
      const double lnu = std::abs(c.xnu) + 4.0 * sigma * std::sqrt(c.t);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dec.B_S);
      const double llat =
          4.0 * std::sqrt(c.t * es.eigenvalues().maxCoeff()) + 1.0;

      std::vector<Eigen::VectorXd> ys;
      for (int i = 0; i < 21; ++i)
        for (int j = 0; j < 21; ++j)
          ys.push_back(Eigen::Vector2d(-llat + 2.0 * llat * i / 20.0,
                                       -lnu + 2.0 * lnu * j / 20.0));
      const std::vector<double> g =
          density_grid_serial(ys, c.t, x, params, dec, QuadratureSpec{});

      const nlohmann::json base = {{"model", model_json(params)},
                                   {"t", c.t},
                                   {"x", {x[0], x[1]}},
                                   {"grid", "21x21"}};
      std::vector<CheckReport> out;
      const double g_min = *std::min_element(g.begin(), g.end());
      out.push_back(make_report("reductions/positivity/" + cell_tag(c), base,
                                g_min, -1e-12, g_min >= -1e-12, t0));
      if (c.alpha1 == 0.0) {
        double sup = 0.0;
        for (std::size_t i = 0; i < ys.size(); ++i)
          sup = std::max(sup,
                         std::abs(g[i] - skew_density(c.t, x, ys[i], dec, c.q)));
        out.push_back(make_report("reductions/sup-vs-skew/" + cell_tag(c),
                                  base, sup, 1e-8, sup < 1e-8, t0));
      }
      if (c.alpha1 == 0.0 && c.q == 0.0) {
        double sup = 0.0;
        for (std::size_t i = 0; i < ys.size(); ++i)
          sup = std::max(sup,
                         std::abs(g[i] - free_density(c.t, x, ys[i], dec)));
        out.push_back(make_report("reductions/sup-vs-free/" + cell_tag(c),
                                  base, sup, 1e-10, sup < 1e-10, t0));
      }
      return out;
    }});
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// pde: transmission-problem residuals on u(t, x, phi).

std::vector<Task> pde_tasks(const SuiteConfig&) {
  std::vector<Task> tasks;
  const double t = 1.0;
  const Eigen::Vector2d x_off(0.0, 0.35);
  const Eigen::Vector2d x_on(0.0, 0.0);

  struct PdeCell {
    double q, alpha1;
    int b_id;
  };

  const std::vector<PdeCell> heat_cells = {
      {0.0, 0.0, 0}, {0.5, 0.0, 0}, {0.5, 0.8, 0}, {0.5, 0.8, 1}};
  for (const auto& c : heat_cells)
    tasks.push_back({[=]() {
      CheckReport r =
          check_heat_equation(t, x_off, cell_model(c.q, c.alpha1, c.b_id));
      r.check_id += "/" + cell_tag({c.q, c.alpha1, c.b_id, t, x_off[1]});
      return r;
    }});
  tasks.push_back({[=]() {
    CheckReport r =
        check_heat_equation_residual(t, x_off, cell_model(0.0, 0.0, 0), 1e-7);
    r.check_id += "/q=0,a=0,B=I";
    return r;
  }});

  const std::vector<PdeCell> cont_cells = {
      {0.0, 0.0, 0}, {0.7, 0.0, 0}, {0.7, 0.8, 0}, {0.5, 0.8, 1}};
  for (const auto& c : cont_cells)
    tasks.push_back({[=]() {
      CheckReport r =
          check_continuity(t, x_on, cell_model(c.q, c.alpha1, c.b_id));
      r.check_id += "/" + cell_tag({c.q, c.alpha1, c.b_id, t, 0.0});
      return r;
    }});

  const std::vector<PdeCell> flux_cells = {
      {0.0, 0.0, 0}, {1.0, 0.0, 0}, {-1.0, 0.0, 0}, {0.5, 0.8, 1}};
  for (const auto& c : flux_cells)
    tasks.push_back({[=]() {
      CheckReport r = check_flux(t, x_on, cell_model(c.q, c.alpha1, c.b_id));
      r.check_id += "/" + cell_tag({c.q, c.alpha1, c.b_id, t, 0.0});
      return r;
    }});
  return tasks;
}

// ---------------------------------------------------------------------------
// lemma1: internal consistency of the joint law, the local-time law, and
// the characteristic-function integral equation.

std::vector<Task> lemma1_tasks(const SuiteConfig& cfg) {
  std::vector<Task> tasks;

  // atom + integral of the continuous part over theta vs the skew density,
  // at seeded random (t, x, y, q) over both B matrices.
  tasks.push_back({[seed = cfg.seed]() {
    const auto t0 = Clock::now();
    Rng rng(seed, 7001);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const ModelParams params =
          cell_model(2.0 * rng.uniform() - 1.0, 0.0, rep % 2);
      const SpaceDecomposition dec = build_decomposition(params);
      const double t = 0.1 + 1.9 * rng.uniform();
      Eigen::Vector2d x(rng.normal(), rng.normal());
      Eigen::Vector2d y(rng.normal(), rng.normal());
      const double sigma = std::sqrt(dec.sigma2);
      const double th_hi = 12.0 * sigma * std::sqrt(t) / dec.sigma2;
      const double integral = integrate_adaptive(
          [&](double th) {
            return joint_density(t, x, y, th, dec, params.q).continuous;
          },
          0.0, th_hi, 1e-12, 1e-16, 256);
      const double atom = joint_density(t, x, y, 0.0, dec, params.q).atom;
      const double closed = skew_density(t, x, y, dec, params.q);
      worst = std::max(worst, std::abs(atom + integral - closed));
    }
    return make_report("lemma1/theta-marginal-identity",
                       {{"n_draws", 100}, {"seed", seed}}, worst, 1e-10,
                       worst < 1e-10, t0);
  }});

  // Joint law integrates to one (atom over y plus continuous over (y, theta)).
  for (const auto& [q, b_id, t] :
       std::vector<std::tuple<double, int, double>>{{0.0, 0, 1.0},
                                                    {0.5, 1, 0.7}}) {
    tasks.push_back({[q = q, b_id = b_id, t = t]() {
      const auto t0 = Clock::now();
      const ModelParams params = cell_model(q, 0.0, b_id);
      const SpaceDecomposition dec = build_decomposition(params);
      const Eigen::Vector2d x(0.3, 0.4);
      const double sigma = std::sqrt(dec.sigma2);
      const double xnu = x.dot(dec.nu);
      const double w = std::abs(xnu) + 10.0 * sigma * std::sqrt(t);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dec.B_S);
      const double xb = (dec.basis.transpose() * x)[0];
      const double wl = 10.0 * std::sqrt(t * es.eigenvalues().maxCoeff()) +
                        std::abs(dec.b_basis[0]) / dec.sigma2 * 2.0 * w;
      const double th_hi = 12.0 * sigma * std::sqrt(t) / dec.sigma2;

      const auto& gx = gl16_nodes();
      const auto& gw = gl16_weights();
      const auto axis = [&](double a, double b, int p) {
        std::vector<std::pair<double, double>> nw;
        const double h = (b - a) / p;
        for (int i = 0; i < p; ++i)
          for (std::size_t k = 0; k < gx.size(); ++k)
            nw.emplace_back(a + (i + 0.5) * h + 0.5 * h * gx[k],
                            0.5 * h * gw[k]);
        return nw;
      };
      const auto total_at = [&](int p) {
        double total = 0.0;
        std::vector<std::pair<double, double>> nu_nodes = axis(-w, 0.0, p);
        {
          const auto pos = axis(0.0, w, p);
          nu_nodes.insert(nu_nodes.end(), pos.begin(), pos.end());
        }
        const auto lat_nodes = axis(xb - wl, xb + wl, p);
        const auto th_nodes = axis(0.0, th_hi, p);
        Eigen::Vector2d y;
        for (const auto& [ynu, wn] : nu_nodes)
          for (const auto& [yl, wla] : lat_nodes) {
            y = ynu * dec.nu + yl * dec.basis.col(0);
            total += wn * wla * joint_density(t, x, y, 0.0, dec, q).atom;
            for (const auto& [th, wth] : th_nodes)
              total += wn * wla * wth *
                       joint_density(t, x, y, th, dec, q).continuous;
          }
        return total;
      };
      double prev = total_at(2), change = 1.0;
      for (int p = 4; p <= 16; p *= 2) {
        const double cur = total_at(p);
        change = std::abs(cur - prev);
        prev = cur;
        if (change < 1e-8) break;
      }
      char id[96];
      std::snprintf(id, sizeof(id), "lemma1/joint-normalization/q=%g,B=%s", q,
                    b_id ? "M" : "I");
      return make_report(
          id,
          {{"model", model_json(params)}, {"t", t}, {"x", {x[0], x[1]}}},
          std::abs(prev - 1.0), 1e-6, std::abs(prev - 1.0) < 1e-6, t0);
    }});
  }

  // Local-time mean from the joint law (quadrature route) vs the closed form
  // sqrt(2 t / (pi sigma^2)).
  for (const auto& [q, b_id, t] :
       std::vector<std::tuple<double, int, double>>{{0.0, 0, 1.0},
                                                    {0.5, 1, 0.7}}) {
    tasks.push_back({[q = q, b_id = b_id, t = t]() {
      const auto t0 = Clock::now();
      const ModelParams params = cell_model(q, 0.0, b_id);
      const SpaceDecomposition dec = build_decomposition(params);
      const double sigma2 = dec.sigma2, sigma = std::sqrt(sigma2);
      const double w = 10.0 * sigma * std::sqrt(t);
      const double th_hi = 12.0 * sigma * std::sqrt(t) / sigma2;
      const double den = 1.0 / std::sqrt(2.0 * M_PI * t * t * t * sigma2);
      const auto& gx = gl16_nodes();
      const auto& gw = gl16_weights();
      // start on S: E[eta] = int theta (1 + q sgn y) rho(theta, |y|) dy dtheta;
      // the q part cancels between the two sides of S.
      const auto mean_at = [&](int p) {
        double sum = 0.0;
        const double hy = w / p, ht = th_hi / p;
        for (int iy = 0; iy < p; ++iy)
          for (std::size_t ky = 0; ky < gx.size(); ++ky) {
            const double m = (iy + 0.5) * hy + 0.5 * hy * gx[ky];
            const double wy = 0.5 * hy * gw[ky];
            for (int it = 0; it < p; ++it)
              for (std::size_t kt = 0; kt < gx.size(); ++kt) {
                const double th = (it + 0.5) * ht + 0.5 * ht * gx[kt];
                const double wt = 0.5 * ht * gw[kt];
                const double zc = sigma2 * th + m;
                sum += 2.0 * wy * wt * th * zc * den *
                       std::exp(-zc * zc / (2.0 * t * sigma2));
              }
          }
        return sum;
      };
      double prev = mean_at(4), change = 1.0;
      for (int p = 8; p <= 32; p *= 2) {
        const double cur = mean_at(p);
        change = std::abs(cur - prev);
        prev = cur;
        if (change < 1e-11) break;
      }
      const double closed = std::sqrt(2.0 * t / (M_PI * sigma2));
      char id[96];
      std::snprintf(id, sizeof(id), "lemma1/eta-mean-quadrature/q=%g,B=%s", q,
                    b_id ? "M" : "I");
      return make_report(
          id, {{"model", model_json(params)}, {"t", t}},
          std::abs(prev - closed), 1e-8, std::abs(prev - closed) < 1e-8, t0);
    }});
  }

  // Sampled local-time law: mean within 3 standard errors of sqrt(2/pi) and
  // Kolmogorov-Smirnov against the half-normal.
  tasks.push_back({[cfg]() {
    const auto t0 = Clock::now();
    const ModelParams params = cell_model(0.0, 0.0, 0);
    const SpaceDecomposition dec = build_decomposition(params);
    const Eigen::Vector2d x(0.0, 0.0);
    const int n = cfg.n_samples;
    const SampleBatch batch = sample_joint_batch(
        n, 1.0, x, params, dec, cfg.seed, 101000000ull, false);
    const double m = mean(batch.theta);
    const double se = std::sqrt(variance(batch.theta) / n);
    const double target = std::sqrt(2.0 / M_PI);
    return make_report("lemma1/eta-mean-sampled/q=0,B=I,t=1",
                       {{"model", model_json(params)},
                        {"t", 1.0},
                        {"n", n},
                        {"seed", cfg.seed},
                        {"mean", m},
                        {"se", se}},
                       std::abs(m - target) / se, 3.0,
                       std::abs(m - target) < 3.0 * se, t0);
  }});
  tasks.push_back({[cfg]() {
    const auto t0 = Clock::now();
    const ModelParams params = cell_model(0.0, 0.0, 0);
    const SpaceDecomposition dec = build_decomposition(params);
    const Eigen::Vector2d x(0.0, 0.0);
    const int n = cfg.n_samples;
    const SampleBatch batch = sample_joint_batch(
        n, 1.0, x, params, dec, cfg.seed, 102000000ull, false);
    const KsResult ks = ks_test(batch.theta, [](double th) {
      return std::erf(th * M_SQRT1_2);  // |N(0,1)| CDF at t = 1, sigma = 1
    });
    return make_report("lemma1/eta-ks-half-normal/q=0,B=I,t=1",
                       {{"model", model_json(params)},
                        {"t", 1.0},
                        {"n", n},
                        {"seed", cfg.seed},
                        {"significance", 0.01},
                        {"D", ks.statistic}},
                       ks.p_value, 0.01, ks.p_value > 0.01, t0);
  }});

  // Characteristic-function integral equation on the acceptance grid.
  const Eigen::Vector2d x_eq(0.0, 0.4);
  for (int b_id : {0, 1})
    for (double q : {0.0, 0.5})
      for (double lambda : {0.0, 0.3, 0.7})
        for (const auto& mu_pair :
             std::vector<std::array<double, 2>>{{0.0, 0.0}, {0.3, -0.2}}) {
          tasks.push_back({[=]() {
            const double threshold = (lambda == 0.0) ? 1e-8 : 1e-4;
            CheckReport r = check_integral_equation(
                1.0, x_eq, lambda, Eigen::Vector2d(mu_pair[0], mu_pair[1]),
                cell_model(q, 0.0, b_id), threshold);
            char tag[96];
            std::snprintf(tag, sizeof(tag),
                          "/q=%g,B=%s,lambda=%g,mu=(%g,%g)", q,
                          b_id == 0 ? "I" : "M", lambda, mu_pair[0],
                          mu_pair[1]);
            r.check_id += tag;
            return r;
          }});
        }
  return tasks;
}

// ---------------------------------------------------------------------------
// semigroup: Chapman-Kolmogorov over the default grid.

std::vector<Task> semigroup_tasks(const SuiteConfig&) {
  std::vector<Task> tasks;
  const Eigen::Vector2d y(0.4, -0.3);
  for (const auto& st :
       std::vector<std::pair<double, double>>{{0.25, 0.25}, {0.5, 1.0}})
    for (const Cell& c : default_grid()) {
      if (c.t != 1.0) continue;  // (s,t) pairs replace the grid's own t
      tasks.push_back({[=]() {
        CheckReport r = check_chapman_kolmogorov(
            st.first, st.second, Eigen::Vector2d(0.0, c.xnu), y,
            cell_model(c.q, c.alpha1, c.b_id));
        char tag[96];
        std::snprintf(tag, sizeof(tag), "/s=%g,t=%g,q=%g,a=%g,B=%s,xnu=%g",
                      st.first, st.second, c.q, c.alpha1,
                      c.b_id == 0 ? "I" : "M", c.xnu);
        r.check_id += tag;
        return r;
      }});
    }
  return tasks;
}

// ---------------------------------------------------------------------------
// sampler-vs-density: exactness of one-step samples against quadrature G.

CheckReport chi2_cell_check(const Cell& c, const SuiteConfig& cfg,
                            std::uint64_t stream0, int bonferroni_n) {
  const auto t0 = Clock::now();
  const ModelParams params = cell_model(c.q, c.alpha1, c.b_id);
  const SpaceDecomposition dec = build_decomposition(params);
  const Eigen::Vector2d x(0.0, c.xnu);
  const int n = cfg.n_samples;
  const SampleBatch batch =
      sample_joint_batch(n, c.t, x, params, dec, cfg.seed, stream0, true);

  const double sigma = std::sqrt(dec.sigma2);
  const double lnu = std::abs(c.xnu) + 4.5 * sigma * std::sqrt(c.t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dec.B_S);
  const double llat = 4.5 * std::sqrt(c.t * es.eigenvalues().maxCoeff()) +
                      std::abs(c.alpha1) * 4.5 * std::sqrt(c.t) / sigma +
                      std::abs(dec.b_basis[0]) / dec.sigma2 * lnu + 0.3;

  const int nb = 20;
  const double h1 = 2.0 * llat / nb, h2 = 2.0 * lnu / nb;
  std::vector<std::int64_t> observed(nb * nb + 1, 0);
  for (int i = 0; i < n; ++i) {
    const double u = batch.y(i, 0) + llat, v = batch.y(i, 1) + lnu;
    const int bi = static_cast<int>(std::floor(u / h1));
    const int bj = static_cast<int>(std::floor(v / h2));
    if (bi < 0 || bi >= nb || bj < 0 || bj >= nb)
      ++observed[nb * nb];
    else
      ++observed[bi * nb + bj];
  }

  const auto& g3 = gauss_legendre(3);
  std::vector<double> expected(nb * nb + 1, 0.0);
  double covered = 0.0;
  Eigen::Vector2d yp;
  for (int bi = 0; bi < nb; ++bi)
    for (int bj = 0; bj < nb; ++bj) {
      const double a1 = -llat + bi * h1, a2 = -lnu + bj * h2;
      double p = 0.0;
      for (int k1 = 0; k1 < 3; ++k1)
        for (int k2 = 0; k2 < 3; ++k2) {
          yp[0] = a1 + 0.5 * h1 * (1.0 + g3.first[k1]);
          yp[1] = a2 + 0.5 * h2 * (1.0 + g3.first[k2]);
          p += 0.25 * h1 * h2 * g3.second[k1] * g3.second[k2] *
               transition_density_fixed(c.t, x, yp, params, dec, 8);
        }
      expected[bi * nb + bj] = n * p;
      covered += p;
    }
  expected[nb * nb] = n * std::max(0.0, 1.0 - covered);

  const Chi2Result chi2 = chi2_gof(observed, expected);
  const double alpha = 0.001 / bonferroni_n;
  return make_report(
      "sampler-vs-density/chi2/" + cell_tag(c),
      {{"model", model_json(params)},
       {"t", c.t},
       {"x", {x[0], x[1]}},
       {"n", n},
       {"seed", cfg.seed},
       {"bins", "20x20+tail"},
       {"df", chi2.df},
       {"chi2", chi2.statistic},
       {"significance", 0.001},
       {"bonferroni_n", bonferroni_n}},
      chi2.p_value, alpha, chi2.p_value > alpha, t0);
}

CheckReport branch_cell_check(const Cell& c, const SuiteConfig& cfg,
                              std::uint64_t stream0) {
  const auto t0 = Clock::now();
  const ModelParams params = cell_model(c.q, c.alpha1, c.b_id);
  const SpaceDecomposition dec = build_decomposition(params);
  const Eigen::Vector2d x(0.0, c.xnu);
  const int n = cfg.n_samples;
  const SampleBatch batch =
      sample_joint_batch(n, c.t, x, params, dec, cfg.seed, stream0, false);

  // P(theta = 0) against the closed-form no-hit probability.
  std::int64_t n_hit = 0, n_plus = 0, crossings = 0;
  for (int i = 0; i < n; ++i) {
    if (batch.hit[i]) {
      ++n_hit;
      if (batch.y(i, 1) > 0.0) ++n_plus;
    } else if (c.xnu != 0.0 &&
               ((batch.y(i, 1) > 0.0) != (c.xnu > 0.0))) {
      ++crossings;
    }
  }
  const double p0 = 1.0 - hit_probability(c.t, c.xnu, dec);
  const double phat = 1.0 - static_cast<double>(n_hit) / n;
  const double se0 = std::sqrt(std::max(p0 * (1.0 - p0), 0.0) / n);
  double z_atom;
  if (se0 == 0.0)
    z_atom = (phat == p0) ? 0.0 : std::numeric_limits<double>::infinity();
  else
    z_atom = std::abs(phat - p0) / se0;

  // Sign law on the hit branch.
  const double p_plus = 0.5 * (1.0 + c.q);
  double z_sign = 0.0;
  if (n_hit > 0) {
    const double ph = static_cast<double>(n_plus) / n_hit;
    const double ses = std::sqrt(std::max(p_plus * (1.0 - p_plus), 0.0) /
                                 static_cast<double>(n_hit));
    if (ses == 0.0)
      z_sign = (ph == p_plus) ? 0.0 : std::numeric_limits<double>::infinity();
    else
      z_sign = std::abs(ph - p_plus) / ses;
  }

  const double statistic = std::max(z_atom, z_sign);
  const bool pass = statistic <= 3.0 && crossings == 0;
  return make_report("sampler-vs-density/branches/" + cell_tag(c),
                     {{"model", model_json(params)},
                      {"t", c.t},
                      {"n", n},
                      {"seed", cfg.seed},
                      {"z_atom", z_atom},
                      {"z_sign", z_sign},
                      {"no_hit_crossings", crossings}},
                     statistic, 3.0, pass, t0);
}

std::vector<Task> sampler_tasks(const SuiteConfig& cfg) {
  std::vector<Task> tasks;
  const std::vector<Cell> cells = default_grid();
  const int bonferroni_n = static_cast<int>(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell c = cells[i];
    const std::uint64_t stream0 = (200 + i) * 1000000ull;
    tasks.push_back({[=]() { return chi2_cell_check(c, cfg, stream0, bonferroni_n); }});
    tasks.push_back({[=]() { return branch_cell_check(c, cfg, stream0 + 500000ull); }});
  }

  // Kernel composition at the sample level: one step of t vs two of t/2.
  const std::vector<std::tuple<double, double, int>> refine_cells = {
      {0.0, 0.0, 0}, {0.5, 0.0, 0}, {0.5, 0.8, 1}, {-1.0, 0.8, 0}};
  for (std::size_t i = 0; i < refine_cells.size(); ++i) {
    const auto [q, a1, b_id] = refine_cells[i];
    tasks.push_back({[=, seed = cfg.seed]() {
      const auto t0 = Clock::now();
      const ModelParams params = cell_model(q, a1, b_id);
      const SpaceDecomposition dec = build_decomposition(params);
      const Eigen::Vector2d x0(0.0, 0.2);
      const int n = 10000;
      const std::uint64_t base = (400 + i) * 1000000ull;
      const auto one = sample_paths(x0, {1.0}, n, params, dec, seed, base);
      const auto two =
          sample_paths(x0, {0.5, 1.0}, n, params, dec, seed, base + n);
      std::vector<double> enu_one(n), enu_two(n);
      for (int p = 0; p < n; ++p) {
        enu_one[p] = one[p].states(1, 1);
        enu_two[p] = two[p].states(2, 1);
      }
      const KsResult ks = ks_test_two_sample(enu_one, enu_two);
      char id[128];
      std::snprintf(id, sizeof(id),
                    "sampler-vs-density/step-refinement/q=%g,a=%g,B=%s", q, a1,
                    b_id == 0 ? "I" : "M");
      return make_report(id,
                         {{"model", model_json(params)},
                          {"n", n},
                          {"seed", seed},
                          {"significance", 0.01},
                          {"D", ks.statistic}},
                         ks.p_value, 0.01, ks.p_value > 0.01, t0);
    }});
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// oracle: skewed lattice walk, calibrated once on the q = 0 closed form.

std::vector<CheckReport> oracle_suite(const SuiteConfig& cfg) {
  std::vector<CheckReport> out;
  const double t = 1.0;

  // Calibration run: q = 0, B = I, start on S; eta closed form sqrt(2/pi).
  const auto t0 = Clock::now();
  const ModelParams params0 = cell_model(0.0, 0.0, 0);
  OracleConfig ocfg;
  ocfg.dx = std::sqrt(t / 10000.0);
  ocfg.n_paths = cfg.n_paths_oracle;
  ocfg.calibration = 1.0;
  const Eigen::Vector2d origin(0.0, 0.0);
  const OracleSamples cal_run =
      oracle_walk(params0, ocfg, t, origin, {cfg.seed, 600000000ull});
  const double calibration = std::sqrt(2.0 / M_PI) / mean(cal_run.eta);
  out.push_back(make_report("oracle/calibration/q=0,B=I,t=1",
                            {{"model", model_json(params0)},
                             {"t", t},
                             {"dx", cal_run.dx_effective},
                             {"n_paths", ocfg.n_paths},
                             {"seed", cfg.seed}},
                            calibration, 0.2,
                            std::abs(calibration - 1.0) < 0.2, t0));
  ocfg.calibration = calibration;

  struct OracleCell {
    double q, alpha1;
    int b_id;
  };
  const std::vector<OracleCell> cells = {
      {0.6, 0.0, 1}, {0.6, 0.8, 1}, {-1.0, 0.0, 0}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto tc = Clock::now();
    const ModelParams params = cell_model(c.q, c.alpha1, c.b_id);
    const SpaceDecomposition dec = build_decomposition(params);
    OracleConfig wcfg = ocfg;
    wcfg.dx = std::sqrt(dec.sigma2 * t / 10000.0);
    const OracleSamples walk = oracle_walk(
        params, wcfg, t, origin, {cfg.seed, (610 + 10 * i) * 1000000ull});
    const SampleBatch exact = sample_joint_batch(
        wcfg.n_paths, t, origin, params, dec, cfg.seed,
        (615 + 10 * i) * 1000000ull, true);

    std::vector<double> exact_nu(wcfg.n_paths), exact_e1(wcfg.n_paths),
        walk_e1(wcfg.n_paths);
    for (int p = 0; p < wcfg.n_paths; ++p) {
      exact_nu[p] = exact.y(p, 1);
      exact_e1[p] = exact.y(p, 0);
      walk_e1[p] = walk.endpoints(p, 0);
    }
    const KsResult ks_nu = ks_test_two_sample(walk.y_nu, exact_nu);
    const KsResult ks_e1 = ks_test_two_sample(walk_e1, exact_e1);
    const double p_min = std::min(ks_nu.p_value, ks_e1.p_value);

    nlohmann::json pj = {{"model", model_json(params)},
                         {"t", t},
                         {"n", wcfg.n_paths},
                         {"seed", cfg.seed},
                         {"calibration", calibration},
                         {"significance", 0.001},
                         {"D_nu", ks_nu.statistic},
                         {"p_nu", ks_nu.p_value},
                         {"D_e1", ks_e1.statistic},
                         {"p_e1", ks_e1.p_value}};
    bool pass = p_min > 0.001;
    if (c.alpha1 != 0.0) {
      const double mw = mean(walk_e1), me = mean(exact_e1);
      const double se = std::sqrt(variance(walk_e1) / wcfg.n_paths +
                                  variance(exact_e1) / wcfg.n_paths);
      pj["drift_mean_walk"] = mw;
      pj["drift_mean_exact"] = me;
      pj["drift_z"] = std::abs(mw - me) / se;
      pass = pass && std::abs(mw - me) <= 3.0 * se;
    }
    char id[96];
    std::snprintf(id, sizeof(id), "oracle/two-sample/q=%g,a=%g,B=%s", c.q,
                  c.alpha1, c.b_id == 0 ? "I" : "M");
    out.push_back(make_report(id, std::move(pj), p_min, 0.001, pass, tc));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = {
      "reductions", "pde", "lemma1", "semigroup", "sampler-vs-density",
      "oracle"};
  return ids;
}

std::vector<CheckReport> run_suite(const std::string& suite_id,
                                   const SuiteConfig& cfg) {
  if (suite_id == "all") {
    std::vector<CheckReport> out;
    for (const auto& id : suite_ids()) {
      auto part = run_suite(id, cfg);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (suite_id == "reductions") return run_tasks(reductions_tasks(cfg));
  if (suite_id == "pde") return run_tasks(pde_tasks(cfg));
  if (suite_id == "lemma1") return run_tasks(lemma1_tasks(cfg));
  if (suite_id == "semigroup") return run_tasks(semigroup_tasks(cfg));
  if (suite_id == "sampler-vs-density") return run_tasks(sampler_tasks(cfg));
  if (suite_id == "oracle") return oracle_suite(cfg);
  throw std::invalid_argument("run_suite: unknown suite id '" + suite_id + "'");
}

}  // namespace membrane
