#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "membrane/density.hpp"
#include "membrane/geometry.hpp"
#include "membrane/sampler.hpp"

namespace membrane {

// Batch front-ends over the per-draw samplers and the pointwise density.
// Each item i owns the stream (seed, stream0 + i), so the OpenMP variants
// are bit-identical to their serial reference implementations regardless of
// scheduling; the *_serial functions are kept as the comparison baseline for
// tests and the benchmark.

struct SampleBatch {
  Eigen::MatrixXd y;  // n x d endpoints
  std::vector<double> theta;
  std::vector<std::uint8_t> hit;
};

/// n one-step joint samples from x; apply_drift_shift replaces the raw
/// endpoint y by y + alpha * theta (the full transition kernel).
SampleBatch sample_joint_batch_serial(std::int64_t n, double t,
                                      const Eigen::VectorXd& x,
                                      const ModelParams& params,
                                      const SpaceDecomposition& dec,
                                      std::uint64_t seed, std::uint64_t stream0,
                                      bool apply_drift_shift);
SampleBatch sample_joint_batch(std::int64_t n, double t,
                               const Eigen::VectorXd& x,
                               const ModelParams& params,
                               const SpaceDecomposition& dec,
                               std::uint64_t seed, std::uint64_t stream0,
                               bool apply_drift_shift);

/// Transition density at each point of ys.
std::vector<double> density_grid_serial(const std::vector<Eigen::VectorXd>& ys,
                                        double t, const Eigen::VectorXd& x,
                                        const ModelParams& params,
                                        const SpaceDecomposition& dec,
                                        const QuadratureSpec& quad);
std::vector<double> density_grid(const std::vector<Eigen::VectorXd>& ys,
                                 double t, const Eigen::VectorXd& x,
                                 const ModelParams& params,
                                 const SpaceDecomposition& dec,
                                 const QuadratureSpec& quad);

/// n_paths exact path skeletons over a shared time grid; path p uses stream
/// stream0 + p.
std::vector<PathSkeleton> sample_paths_serial(
    const Eigen::VectorXd& x0, const std::vector<double>& grid,
    std::int64_t n_paths, const ModelParams& params,
    const SpaceDecomposition& dec, std::uint64_t seed, std::uint64_t stream0);
std::vector<PathSkeleton> sample_paths(const Eigen::VectorXd& x0,
                                       const std::vector<double>& grid,
                                       std::int64_t n_paths,
                                       const ModelParams& params,
                                       const SpaceDecomposition& dec,
                                       std::uint64_t seed,
                                       std::uint64_t stream0);

}  // namespace membrane
