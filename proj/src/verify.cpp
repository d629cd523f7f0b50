#include "membrane/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace membrane {

nlohmann::json report_to_json(const CheckReport& r) {
  return nlohmann::json{{"check_id", r.check_id},
                        {"params", r.params},
                        {"statistic", r.statistic},
                        {"threshold", r.threshold},
                        {"passed", r.passed}};
}

CheckReport report_from_json(const nlohmann::json& j) {
  CheckReport r;
  r.check_id = j.at("check_id").get<std::string>();
  r.params = j.at("params");
  r.statistic = j.at("statistic").get<double>();
  r.threshold = j.at("threshold").get<double>();
  r.passed = j.at("passed").get<bool>();
  return r;
}

std::string reports_to_jsonl(const std::vector<CheckReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += report_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::string summary_table(const std::vector<CheckReport>& reports) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-58s %14s %14s %6s %8s\n", "check",
                "statistic", "threshold", "pass", "ms");
  os << buf;
  int failed = 0;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%-58s %14.6g %14.6g %6s %8lld\n",
                  r.check_id.c_str(), r.statistic, r.threshold,
                  r.passed ? "ok" : "FAIL",
                  static_cast<long long>(r.runtime_ms));
    os << buf;
    if (!r.passed) ++failed;
  }
  std::snprintf(buf, sizeof(buf), "%zu checks, %d failed\n", reports.size(),
                failed);
  os << buf;
  return os.str();
}

bool all_passed(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (!r.passed) return false;
  return true;
}

void OracleConfig::validate() const {
  if (!(dx > 0.0)) throw std::invalid_argument("OracleConfig: dx must be > 0");
  if (!(calibration > 0.0))
    throw std::invalid_argument("OracleConfig: calibration must be > 0");
  if (n_paths < 1)
    throw std::invalid_argument("OracleConfig: n_paths must be >= 1");
  if (n_steps < 0)
    throw std::invalid_argument("OracleConfig: n_steps must be >= 0");
}

OracleSamples oracle_walk(const ModelParams& params, const OracleConfig& cfg,
                          double t, const Eigen::VectorXd& x0, RngState rng) {
  cfg.validate();
  if (!(t > 0.0)) throw std::invalid_argument("oracle_walk: t must be > 0");
  const SpaceDecomposition dec = build_decomposition(params);
  const double sigma = std::sqrt(dec.sigma2);

  // Shrink dx so that n_steps * (dx/sigma)^2 = t exactly.
  std::int64_t n_steps =
      static_cast<std::int64_t>(std::ceil(t * dec.sigma2 / (cfg.dx * cfg.dx)));
  if (cfg.n_steps > 0 && cfg.n_steps != n_steps)
    throw std::invalid_argument("oracle_walk: n_steps inconsistent with (t, dx)");
  if (n_steps < 10000)
    throw std::invalid_argument(
        "oracle_walk: dx too coarse (need n_steps = t (sigma/dx)^2 >= 1e4)");
  if (n_steps > 1000000000)
    throw std::invalid_argument("oracle_walk: n_steps overflow bound exceeded");
  const double dx = sigma * std::sqrt(t / static_cast<double>(n_steps));
  const double dt = t / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(dt);
  const double eta_per_visit = cfg.calibration * dx / dec.sigma2;
  const double p_up_at_zero = 0.5 * (1.0 + params.q);

  const int k = dec.d - 1;
  const std::int64_t start_site = std::llround(x0.dot(dec.nu) / dx);
  const Eigen::VectorXd x0_b = dec.basis.transpose() * x0;

  OracleSamples out;
  out.n_steps = n_steps;
  out.dx_effective = dx;
  out.y_nu.resize(cfg.n_paths);
  out.eta.resize(cfg.n_paths);
  out.endpoints.resize(cfg.n_paths, dec.d);

#pragma omp parallel for schedule(static)
  for (int p = 0; p < cfg.n_paths; ++p) {
    Rng gen(rng.seed, rng.stream + static_cast<std::uint64_t>(p));
    std::int64_t site = start_site;
    Eigen::VectorXd lat = x0_b;
    Eigen::VectorXd xi(k);
    std::int64_t visits = 0;
    for (std::int64_t s = 0; s < n_steps; ++s) {
      double p_up = 0.5;
      if (site == 0) {
        ++visits;
        p_up = p_up_at_zero;
      }
      const double move = (gen.uniform() < p_up) ? dx : -dx;
      site += (move > 0.0) ? 1 : -1;
      // Lateral increment conditioned on the nu-increment.
      for (int j = 0; j < k; ++j) xi[j] = gen.normal();
      lat += (move / dec.sigma2) * dec.b_basis +
             sqrt_dt * (dec.chol_B_S * xi);
    }
    const double eta = static_cast<double>(visits) * eta_per_visit;
    const double ynu = static_cast<double>(site) * dx;
    Eigen::VectorXd endpoint =
        dec.basis * (lat + eta * dec.alpha_basis) + ynu * dec.nu;
    out.y_nu[p] = ynu;
    out.eta[p] = eta;
    out.endpoints.row(p) = endpoint;
  }
  return out;
}

}  // namespace membrane
