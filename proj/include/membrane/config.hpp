#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "membrane/density.hpp"
#include "membrane/geometry.hpp"

namespace membrane {

/// Per-axis evaluation grid (min, max, count) for density tabulation.
struct GridSpec {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
  std::vector<int> count;
};

struct OutputSpec {
  std::string path;            // empty = stdout
  std::string format = "csv";  // csv | jsonl
};

/// Parsed run configuration. ModelParams invariants are re-validated at
/// parse time; a config that violates them never reaches the compute path.
struct RunConfig {
  std::string run;  // density | sample | path | verify
  ModelParams model;
  bool has_model = false;
  std::vector<double> times;  // scalar t = one entry; path = full grid
  Eigen::VectorXd x;
  std::int64_t n = 1;
  std::uint64_t seed = 0;
  QuadratureSpec quad;
  GridSpec grid;
  bool has_grid = false;
  std::string suite = "all";
  bool shift = false;  // sample: apply the alpha * theta drift shift
  OutputSpec output;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& c);

}  // namespace membrane
