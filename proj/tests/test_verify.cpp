#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "membrane/stats.hpp"
#include "membrane/verify.hpp"

using namespace membrane;

namespace {

ModelParams model2(double q, double alpha1, bool coupled) {
  ModelParams p;
  p.d = 2;
  p.B.resize(2, 2);
  if (coupled)
    p.B << 2, 1, 1, 2;
  else
    p.B << 1, 0, 0, 1;
  p.nu = Eigen::Vector2d(0, 1);
  p.q = q;
  p.alpha = Eigen::Vector2d(alpha1, 0);
  return p;
}

}  // namespace

TEST_CASE("check report serialization round-trips") {
  CheckReport r;
  r.check_id = "demo/check";
  r.params = {{"t", 0.5}, {"n", 100}, {"nested", {{"a", 1}}}};
  r.statistic = 0.123456789012345;
  r.threshold = 1e-4;
  r.passed = true;
  r.runtime_ms = 77;
  const CheckReport back = report_from_json(report_to_json(r));
  CHECK(back.check_id == r.check_id);
  CHECK(back.params == r.params);
  CHECK(back.statistic == r.statistic);
  CHECK(back.threshold == r.threshold);
  CHECK(back.passed == r.passed);
  // runtime is table-only; the JSONL stays byte-stable across reruns.
  CHECK(report_to_json(r).contains("runtime_ms") == false);
}

TEST_CASE("summary table marks failures") {
  CheckReport ok, bad;
  ok.check_id = "a";
  ok.passed = true;
  bad.check_id = "b";
  bad.passed = false;
  const std::string table = summary_table({ok, bad});
  CHECK(table.find("FAIL") != std::string::npos);
  CHECK(all_passed({ok}));
  CHECK(!all_passed({ok, bad}));
}

TEST_CASE("oracle walk validation and calibration-free mean") {
  const auto params = model2(0.0, 0.0, false);
  OracleConfig cfg;
  cfg.dx = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.dx = 0.5;  // too coarse: n_steps = 4 << 1e4
  CHECK_THROWS_AS(
      oracle_walk(params, cfg, 1.0, Eigen::Vector2d(0, 0), {1, 0}),
      std::invalid_argument);

  cfg = {};
  cfg.dx = 0.01;
  cfg.n_paths = 2000;
  const OracleSamples s =
      oracle_walk(params, cfg, 1.0, Eigen::Vector2d(0, 0), {5, 0});
  CHECK(s.n_steps == 10000);
  // Uncalibrated lattice local time should already be within a few percent.
  CHECK(std::abs(mean(s.eta) - 0.7978845608028654) < 0.05);
  // Endpoint variance on the nu-axis matches t.
  CHECK(std::abs(variance(s.y_nu) - 1.0) < 0.07);
}

TEST_CASE("oracle walk is reproducible and skewed at the membrane") {
  const auto params = model2(0.6, 0.0, false);
  OracleConfig cfg;
  cfg.dx = 0.01;
  cfg.n_paths = 2000;
  const OracleSamples a =
      oracle_walk(params, cfg, 1.0, Eigen::Vector2d(0, 0), {6, 0});
  const OracleSamples b =
      oracle_walk(params, cfg, 1.0, Eigen::Vector2d(0, 0), {6, 0});
  CHECK(a.y_nu == b.y_nu);
  CHECK(a.eta == b.eta);
  int plus = 0;
  for (double w : a.y_nu) plus += (w > 0.0);
  // P(end above S) = (1+q)/2 in the limit; allow a wide band.
  CHECK(std::abs(double(plus) / cfg.n_paths - 0.8) < 0.05);
}

TEST_CASE("heat equation residual: exact kernel case") {
  const auto r = check_heat_equation_residual(
      1.0, Eigen::Vector2d(0.0, 0.35), model2(0.0, 0.0, false), 1e-7);
  CHECK(r.passed);
}

TEST_CASE("heat equation convergence order with membrane and drift") {
  const auto r =
      check_heat_equation(1.0, Eigen::Vector2d(0.0, 0.35), model2(0.5, 0.8, false));
  CHECK(r.statistic >= 1.7);
  CHECK(r.passed);
  CHECK_THROWS_AS(
      check_heat_equation(1.0, Eigen::Vector2d(0.0, 0.005), model2(0.5, 0.8, false)),
      std::invalid_argument);
}

TEST_CASE("continuity across the membrane") {
  const auto r =
      check_continuity(1.0, Eigen::Vector2d(0, 0), model2(0.7, 0.0, false));
  CHECK(r.passed);
  CHECK_THROWS_AS(
      check_continuity(1.0, Eigen::Vector2d(0, 0.2), model2(0.7, 0.0, false)),
      std::invalid_argument);
}

TEST_CASE("flux condition: pure reflection") {
  const auto r = check_flux(1.0, Eigen::Vector2d(0, 0), model2(1.0, 0.0, false));
  CHECK(r.passed);
}

TEST_CASE("flux condition: generic parameters") {
  const auto r = check_flux(1.0, Eigen::Vector2d(0, 0), model2(0.5, 0.8, true));
  CHECK(r.passed);
}

TEST_CASE("chapman-kolmogorov: free and generic cells") {
  const auto free_r =
      check_chapman_kolmogorov(0.25, 0.25, Eigen::Vector2d(0, 0.5),
                               Eigen::Vector2d(0.4, -0.3), model2(0, 0, false));
  CHECK(free_r.statistic < 1e-6);
  const auto r =
      check_chapman_kolmogorov(0.5, 1.0, Eigen::Vector2d(0, 0.5),
                               Eigen::Vector2d(0.4, -0.3), model2(0.5, 0.8, true));
  CHECK(r.passed);
  CHECK_THROWS_AS(check_chapman_kolmogorov(
                      0.5, 1.0, Eigen::Vector3d(0, 0, 0.5),
                      Eigen::Vector3d(0, 0.4, -0.3),
                      [] {
                        ModelParams p;
                        p.d = 3;
                        p.B = Eigen::Matrix3d::Identity();
                        p.nu = Eigen::Vector3d(0, 0, 1);
                        p.alpha = Eigen::Vector3d::Zero();
                        return p;
                      }()),
                  std::invalid_argument);
}

TEST_CASE("integral equation: reduction at lambda = 0 and a generic cell") {
  const auto r0 = check_integral_equation(1.0, Eigen::Vector2d(0, 0.4), 0.0,
                                          Eigen::Vector2d(0.3, -0.2),
                                          model2(0.5, 0.0, false), 1e-8);
  CHECK(r0.passed);
  const auto r = check_integral_equation(1.0, Eigen::Vector2d(0, 0.4), 0.7,
                                         Eigen::Vector2d(0.3, -0.2),
                                         model2(0.5, 0.0, false), 1e-4);
  CHECK(r.passed);
  CHECK_THROWS_AS(
      check_integral_equation(1.0, Eigen::Vector2d(0, 0.4), 0.7,
                              Eigen::Vector2d(0.3, -0.2), model2(0.5, 0.8, false),
                              1e-4),
      std::invalid_argument);
}

TEST_CASE("suite dispatch") {
  CHECK_THROWS_AS(run_suite("nope", {}), std::invalid_argument);
  CHECK(suite_ids().size() == 6);
}
