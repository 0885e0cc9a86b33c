// Benchmark comparing the OpenMP kernels against their serial reference
// implementations: kernel sampling on the mode grid and interaction-block
// assembly on the truncated Fock space. Both variants are checked for exact
// agreement before timing.
//
// Usage: uvlab-bench [cells_per_axis] [boson_cap] [repetitions]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "uvlab/hamiltonian.hpp"

using namespace uvlab;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    fn();
    const double s = std::chrono::duration<double>(clock_type::now() - t0).count();
    if (s < best) best = s;
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int cells = argc > 1 ? std::atoi(argv[1]) : 64;
  const int cap = argc > 2 ? std::atoi(argv[2]) : 2;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 3;

  const DispersionParams dp{1.0, 1.2};
  KernelSpec ks;
  ks.p = 0.5;
  CutoffSpec cs;
  cs.lambda = 8.0;
  cs.chi_shape = ChiShape::SmoothBump;

  std::printf("threads: %d\n", omp_get_max_threads());

  // --- kernel sampling on a large 1d grid ---
  const ModeGrid big = build_grid(1, 8.0, cells);
  const KernelMatrix ref = detail::kernel_matrix_serial(ks, cs, dp, big);
  const KernelMatrix par = kernel_matrix(ks, cs, dp, big);
  const double kdiff = (ref.values1 - par.values1).norm() +
                       (ref.values2 - par.values2).norm();
  const double t_ks =
      time_best_of(reps, [&] { (void)detail::kernel_matrix_serial(ks, cs, dp, big); });
  const double t_kp = time_best_of(reps, [&] { (void)kernel_matrix(ks, cs, dp, big); });
  std::printf("kernel_matrix  %4d cells: serial %8.4f s  parallel %8.4f s  "
              "speedup %5.2fx  max_diff %g\n",
              cells, t_ks, t_kp, t_ks / t_kp, kdiff);

  // --- block assembly on a truncated basis (small grid, large basis) ---
  const int block_cells = 8;
  const ModeGrid grid = build_grid(1, 8.0, block_cells);
  const FockBasis basis(block_cells, block_cells, cap);
  const KernelMatrix km = kernel_matrix(ks, cs, dp, grid);
  const SparseOperator bref = detail::build_block_serial(BlockTag::ab, km, basis);
  const SparseOperator bpar = build_block(BlockTag::ab, km, basis);
  const double bdiff =
      Eigen::MatrixXcd(SparseMat(bref.mat - bpar.mat)).cwiseAbs().sum();
  const double t_bs = time_best_of(
      reps, [&] { (void)detail::build_block_serial(BlockTag::ab, km, basis); });
  const double t_bp =
      time_best_of(reps, [&] { (void)build_block(BlockTag::ab, km, basis); });
  std::printf("build_block    dim %5zu: serial %8.4f s  parallel %8.4f s  "
              "speedup %5.2fx  max_diff %g\n",
              basis.dim(), t_bs, t_bp, t_bs / t_bp, bdiff);

  if (kdiff != 0.0 || bdiff != 0.0) {
    std::printf("MISMATCH between serial and parallel results\n");
    return 1;
  }
  return 0;
}
