// membrane-bm: batch front-end for density evaluation, exact sampling, path
// simulation and verification suites. See README for the config schema.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "membrane/config.hpp"
#include "membrane/kernels.hpp"
#include "membrane/verify.hpp"

namespace {

using namespace membrane;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ostream& open_output(const OutputSpec& out, std::ofstream& file) {
  if (out.path.empty()) return std::cout;
  file.open(out.path, std::ios::binary);
  if (!file) throw std::invalid_argument("cannot open output file " + out.path);
  return file;
}

int cmd_density(const RunConfig& cfg) {
  if (!cfg.has_grid)
    throw std::invalid_argument("density: config needs a grid (min/max/count)");
  if (cfg.grid.min.size() != cfg.model.d)
    throw std::invalid_argument("density: grid must have d axes");
  if (cfg.times.size() != 1)
    throw std::invalid_argument("density: t must be a single time");

  const SpaceDecomposition dec = build_decomposition(cfg.model);
  const int d = cfg.model.d;
  std::vector<std::vector<double>> axes(d);
  for (int a = 0; a < d; ++a) {
    const int n = cfg.grid.count[a];
    for (int i = 0; i < n; ++i)
      axes[a].push_back(n == 1 ? cfg.grid.min[a]
                               : cfg.grid.min[a] + (cfg.grid.max[a] -
                                                    cfg.grid.min[a]) *
                                                       i / (n - 1));
  }
  std::size_t total = 1;
  for (const auto& ax : axes) total *= ax.size();

  // Lexicographic in grid indices: first axis outermost.
  std::vector<Eigen::VectorXd> points(total, Eigen::VectorXd(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      points[flat][a] = axes[a][rem % axes[a].size()];
      rem /= axes[a].size();
    }
  }
  const std::vector<double> g =
      density_grid(points, cfg.times[0], cfg.x, cfg.model, dec, cfg.quad);

  std::ofstream file;
  std::ostream& os = open_output(cfg.output, file);
  for (int a = 0; a < d; ++a) os << "y_" << (a + 1) << ",";
  os << "G\n";
  for (std::size_t i = 0; i < total; ++i) {
    for (int a = 0; a < d; ++a) os << fmt(points[i][a]) << ",";
    os << fmt(g[i]) << "\n";
  }
  return 0;
}

int cmd_sample(const RunConfig& cfg) {
  if (cfg.times.size() != 1)
    throw std::invalid_argument("sample: t must be a single time");
  const SpaceDecomposition dec = build_decomposition(cfg.model);
  const SampleBatch batch = sample_joint_batch(
      cfg.n, cfg.times[0], cfg.x, cfg.model, dec, cfg.seed, 0, cfg.shift);

  std::ofstream file;
  std::ostream& os = open_output(cfg.output, file);
  for (int a = 0; a < cfg.model.d; ++a) os << "y_" << (a + 1) << ",";
  os << "theta,hit\n";
  for (std::int64_t i = 0; i < cfg.n; ++i) {
    for (int a = 0; a < cfg.model.d; ++a) os << fmt(batch.y(i, a)) << ",";
    os << fmt(batch.theta[i]) << "," << int(batch.hit[i]) << "\n";
  }
  return 0;
}

int cmd_path(const RunConfig& cfg) {
  if (cfg.times.empty())
    throw std::invalid_argument("path: config needs a time grid");
  const SpaceDecomposition dec = build_decomposition(cfg.model);
  const auto paths =
      sample_paths(cfg.x, cfg.times, cfg.n, cfg.model, dec, cfg.seed, 0);

  std::ofstream file;
  std::ostream& os = open_output(cfg.output, file);
  os << "path,t";
  for (int a = 0; a < cfg.model.d; ++a) os << ",x_" << (a + 1);
  os << ",eta\n";
  for (std::int64_t p = 0; p < cfg.n; ++p)
    for (std::size_t i = 0; i < paths[p].times.size(); ++i) {
      os << p << "," << fmt(paths[p].times[i]);
      for (int a = 0; a < cfg.model.d; ++a)
        os << "," << fmt(paths[p].states(i, a));
      os << "," << fmt(paths[p].local_time[i]) << "\n";
    }
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  SuiteConfig scfg;
  scfg.seed = cfg.seed;
  const auto reports = run_suite(cfg.suite, scfg);

  std::ofstream file;
  std::ostream& os = open_output(cfg.output, file);
  os << reports_to_jsonl(reports);
  std::cout << summary_table(reports);
  return all_passed(reports) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brownian motion with a partly reflecting membrane on a hyperplane"};
  app.require_subcommand(1);

  std::string config_path, out_override, format_override;
  std::uint64_t seed_override = 0;
  bool has_seed = false;

  for (const char* name : {"density", "sample", "path", "verify"}) {
    CLI::App* sub = app.add_subcommand(
        name, std::string("run = ") + name + " (see config schema)");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed_override, "override config seed")
        ->each([&](const std::string&) { has_seed = true; });
    sub->add_option("--out", out_override, "override output path");
    sub->add_option("--format", format_override, "override output format");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (const char* threads = std::getenv("MEMBRANE_BM_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }

  try {
    RunConfig cfg = load_config(config_path);
    const std::string sub = app.get_subcommands().front()->get_name();
    if (cfg.run != sub)
      throw std::invalid_argument("config run=" + cfg.run +
                                  " does not match subcommand " + sub);
    if (has_seed) cfg.seed = seed_override;
    if (!out_override.empty()) cfg.output.path = out_override;
    if (!format_override.empty()) {
      if (format_override != "csv" && format_override != "jsonl")
        throw std::invalid_argument("--format must be csv or jsonl");
      cfg.output.format = format_override;
    }

    if (sub == "density") return cmd_density(cfg);
    if (sub == "sample") return cmd_sample(cfg);
    if (sub == "path") return cmd_path(cfg);
    return cmd_verify(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
