#include "membrane/kernels.hpp"

#include <stdexcept>

namespace membrane {

namespace {

void fill_sample(SampleBatch& out, std::int64_t i, double t,
                 const Eigen::VectorXd& x, const ModelParams& params,
                 const SpaceDecomposition& dec, std::uint64_t seed,
                 std::uint64_t stream0, bool apply_drift_shift) {
  Rng rng(seed, stream0 + static_cast<std::uint64_t>(i));
  JointSample s = sample_joint(t, x, params, dec, rng);
  out.y.row(i) = apply_drift_shift
                     ? Eigen::VectorXd(s.y + s.theta * params.alpha)
                     : s.y;
  out.theta[i] = s.theta;
  out.hit[i] = s.hit ? 1 : 0;
}

}  // namespace

SampleBatch sample_joint_batch_serial(std::int64_t n, double t,
                                      const Eigen::VectorXd& x,
                                      const ModelParams& params,
                                      const SpaceDecomposition& dec,
                                      std::uint64_t seed, std::uint64_t stream0,
                                      bool apply_drift_shift) {
  if (n < 1) throw std::invalid_argument("sample_joint_batch: n must be >= 1");
  SampleBatch out;
  out.y.resize(n, dec.d);
  out.theta.resize(n);
  out.hit.resize(n);
  for (std::int64_t i = 0; i < n; ++i)
    fill_sample(out, i, t, x, params, dec, seed, stream0, apply_drift_shift);
  return out;
}

SampleBatch sample_joint_batch(std::int64_t n, double t,
                               const Eigen::VectorXd& x,
                               const ModelParams& params,
                               const SpaceDecomposition& dec,
                               std::uint64_t seed, std::uint64_t stream0,
                               bool apply_drift_shift) {
  if (n < 1) throw std::invalid_argument("sample_joint_batch: n must be >= 1");
  SampleBatch out;
  out.y.resize(n, dec.d);
  out.theta.resize(n);
  out.hit.resize(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    fill_sample(out, i, t, x, params, dec, seed, stream0, apply_drift_shift);
  return out;
}

std::vector<double> density_grid_serial(const std::vector<Eigen::VectorXd>& ys,
                                        double t, const Eigen::VectorXd& x,
                                        const ModelParams& params,
                                        const SpaceDecomposition& dec,
                                        const QuadratureSpec& quad) {
  std::vector<double> g(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i)
    g[i] = transition_density(t, x, ys[i], params, dec, quad);
  return g;
}

std::vector<double> density_grid(const std::vector<Eigen::VectorXd>& ys,
                                 double t, const Eigen::VectorXd& x,
                                 const ModelParams& params,
                                 const SpaceDecomposition& dec,
                                 const QuadratureSpec& quad) {
  std::vector<double> g(ys.size());
  const std::int64_t n = static_cast<std::int64_t>(ys.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i)
    g[i] = transition_density(t, x, ys[i], params, dec, quad);
  return g;
}

std::vector<PathSkeleton> sample_paths_serial(
    const Eigen::VectorXd& x0, const std::vector<double>& grid,
    std::int64_t n_paths, const ModelParams& params,
    const SpaceDecomposition& dec, std::uint64_t seed, std::uint64_t stream0) {
  if (n_paths < 1) throw std::invalid_argument("sample_paths: n_paths must be >= 1");
  std::vector<PathSkeleton> paths(n_paths);
  for (std::int64_t p = 0; p < n_paths; ++p) {
    Rng rng(seed, stream0 + static_cast<std::uint64_t>(p));
    paths[p] = sample_path(x0, grid, params, dec, rng);
  }
  return paths;
}

std::vector<PathSkeleton> sample_paths(const Eigen::VectorXd& x0,
                                       const std::vector<double>& grid,
                                       std::int64_t n_paths,
                                       const ModelParams& params,
                                       const SpaceDecomposition& dec,
                                       std::uint64_t seed,
                                       std::uint64_t stream0) {
  if (n_paths < 1) throw std::invalid_argument("sample_paths: n_paths must be >= 1");
  std::vector<PathSkeleton> paths(n_paths);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n_paths; ++p) {
    Rng rng(seed, stream0 + static_cast<std::uint64_t>(p));
    paths[p] = sample_path(x0, grid, params, dec, rng);
  }
  return paths;
}

}  // namespace membrane
