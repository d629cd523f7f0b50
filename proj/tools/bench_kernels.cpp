// Times the OpenMP batch kernels against their serial reference
// implementations and cross-checks that both produce identical output.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "membrane/kernels.hpp"

using namespace membrane;

namespace {

double ms(std::chrono::steady_clock::time_point a,
          std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

template <class F>
double timed(F&& f) {
  const auto a = std::chrono::steady_clock::now();
  f();
  return ms(a, std::chrono::steady_clock::now());
}

void row(const char* name, double serial_ms, double parallel_ms, bool match) {
  std::printf("%-22s %10.1f ms %10.1f ms   x%.2f   %s\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms,
              match ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  ModelParams params;
  params.d = 2;
  params.B.resize(2, 2);
  params.B << 2.0, 1.0, 1.0, 2.0;
  params.nu = Eigen::Vector2d(0.0, 1.0);
  params.q = 0.5;
  params.alpha = Eigen::Vector2d(0.8, 0.0);
  const SpaceDecomposition dec = build_decomposition(params);
  const Eigen::Vector2d x(0.0, 0.2);

  std::printf("threads: %d\n", omp_get_max_threads());

  {
    const std::int64_t n = 200000;
    SampleBatch a, b;
    const double ts =
        timed([&] { a = sample_joint_batch_serial(n, 1.0, x, params, dec, 7, 0, true); });
    const double tp =
        timed([&] { b = sample_joint_batch(n, 1.0, x, params, dec, 7, 0, true); });
    row("sample_joint_batch", ts, tp,
        a.y == b.y && a.theta == b.theta && a.hit == b.hit);
  }

  {
    std::vector<Eigen::VectorXd> ys;
    for (int i = 0; i < 81; ++i)
      for (int j = 0; j < 81; ++j)
        ys.push_back(Eigen::Vector2d(-3.0 + 6.0 * i / 80.0,
                                     -3.0 + 6.0 * j / 80.0));
    std::vector<double> a, b;
    QuadratureSpec quad;
    const double ts =
        timed([&] { a = density_grid_serial(ys, 1.0, x, params, dec, quad); });
    const double tp =
        timed([&] { b = density_grid(ys, 1.0, x, params, dec, quad); });
    row("density_grid 81x81", ts, tp, a == b);
  }

  {
    std::vector<double> grid;
    for (int i = 1; i <= 16; ++i) grid.push_back(i / 16.0);
    std::vector<PathSkeleton> a, b;
    const double ts = timed(
        [&] { a = sample_paths_serial(x, grid, 2000, params, dec, 7, 0); });
    const double tp =
        timed([&] { b = sample_paths(x, grid, 2000, params, dec, 7, 0); });
    bool match = a.size() == b.size();
    for (std::size_t p = 0; match && p < a.size(); ++p)
      match = a[p].states == b[p].states && a[p].local_time == b[p].local_time;
    row("sample_paths 2000x16", ts, tp, match);
  }

  return 0;
}
