#include "uvlab/hamiltonian.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uvlab {

namespace {

void require_match(const KernelMatrix& km, const FockBasis& basis) {
  if (!km.grid) throw std::invalid_argument("KernelMatrix missing grid reference");
  const auto m = km.grid->size();
  if (basis.boson_modes() != static_cast<int>(m) ||
      basis.fermion_modes() != static_cast<int>(m))
    throw std::invalid_argument("basis mode counts must match the grid");
}

// Appends the images of source state `col` under the tagged block.
void block_column(BlockTag tag, int sharp, const KernelMatrix& km,
                  const FockBasis& basis, std::size_t col,
                  std::vector<Eigen::Triplet<cplx>>& out) {
  const Eigen::MatrixXcd& g = km.values(sharp);
  const bool conj_kernel = (tag == BlockTag::astbst || tag == BlockTag::astb);
  const bool boson_create = (tag == BlockTag::astbst || tag == BlockTag::astb);
  const bool fermion_create = (tag == BlockTag::astbst || tag == BlockTag::abst);

  const std::size_t r = basis.boson_rank_of(col);
  const std::uint64_t bits = basis.fermion_bits_of(col);
  std::vector<int> occ = basis.boson_state(r);
  const int total = std::accumulate(occ.begin(), occ.end(), 0);
  const int m = basis.boson_modes();

  for (int i = 0; i < m; ++i) {
    const std::uint64_t bit = std::uint64_t(1) << i;
    const bool occupied = (bits & bit) != 0;
    if (fermion_create ? occupied : !occupied) continue;
    const int parity = __builtin_popcountll(bits & (bit - 1));
    const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
    const std::uint64_t bits2 = bits ^ bit;

    for (int j = 0; j < m; ++j) {
      double bcoeff;
      if (boson_create) {
        if (total >= basis.boson_cap()) continue;  // cap projection
        bcoeff = std::sqrt(static_cast<double>(occ[j] + 1));
        occ[j] += 1;
      } else {
        if (occ[j] == 0) continue;
        bcoeff = std::sqrt(static_cast<double>(occ[j]));
        occ[j] -= 1;
      }
      const std::size_t r2 = basis.boson_rank(occ);
      occ[j] = basis.boson_state(r)[j];  // restore

      cplx val = g(i, j);
      if (conj_kernel) val = std::conj(val);
      val *= km.w * sign * bcoeff;
      if (val != cplx(0.0, 0.0))
        out.emplace_back(static_cast<int>(basis.index(r2, bits2)),
                         static_cast<int>(col), val);
    }
  }
}

SparseOperator block_from_columns(BlockTag tag, int sharp, const KernelMatrix& km,
                                  const FockBasis& basis, bool parallel) {
  require_match(km, basis);
  const std::size_t dim = basis.dim();
  std::vector<Eigen::Triplet<cplx>> trips;

  if (!parallel) {
    for (std::size_t col = 0; col < dim; ++col)
      block_column(tag, sharp, km, basis, col, trips);
  } else {
    int nthreads = 1;
#ifdef _OPENMP
    nthreads = omp_get_max_threads();
#endif
    std::vector<std::vector<Eigen::Triplet<cplx>>> local(nthreads);
#pragma omp parallel num_threads(nthreads)
    {
      int tid = 0;
#ifdef _OPENMP
      tid = omp_get_thread_num();
#endif
#pragma omp for schedule(static)
      for (std::ptrdiff_t col = 0; col < static_cast<std::ptrdiff_t>(dim); ++col)
        block_column(tag, sharp, km, basis, static_cast<std::size_t>(col), local[tid]);
    }
    // merge in thread order: entries are unique per (row, col), so the
    // resulting matrix is independent of the schedule
    for (auto& v : local) trips.insert(trips.end(), v.begin(), v.end());
  }

  SparseMat mat(dim, dim);
  mat.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(dim, std::move(mat), false);
}

}  // namespace

SparseOperator build_free(const ModeGrid& grid, const DispersionParams& params,
                          const FockBasis& basis) {
  const auto m = grid.size();
  if (basis.boson_modes() != static_cast<int>(m) ||
      basis.fermion_modes() != static_cast<int>(m))
    throw std::invalid_argument("build_free: basis mode counts must match the grid");

  std::vector<double> omega_a(m), omega_b(m);
  for (std::size_t c = 0; c < m; ++c) {
    omega_a[c] = dispersion(ParticleKind::Boson, grid.centers[c], params);
    omega_b[c] = dispersion(ParticleKind::Fermion, grid.centers[c], params);
  }

  const std::size_t dim = basis.dim();
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const auto& occ = basis.boson_state(basis.boson_rank_of(idx));
    const std::uint64_t bits = basis.fermion_bits_of(idx);
    double e = 0.0;
    for (std::size_t j = 0; j < m; ++j) e += occ[j] * omega_a[j];
    for (std::size_t i = 0; i < m; ++i)
      if (bits & (std::uint64_t(1) << i)) e += omega_b[i];
    trips.emplace_back(static_cast<int>(idx), static_cast<int>(idx), cplx(e, 0.0));
  }
  SparseMat mat(dim, dim);
  mat.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(dim, std::move(mat), true);
}

int standard_kernel(BlockTag tag) {
  return (tag == BlockTag::ab || tag == BlockTag::astbst) ? 2 : 1;
}

SparseOperator build_block(BlockTag tag, const KernelMatrix& km,
                           const FockBasis& basis) {
  return block_from_columns(tag, standard_kernel(tag), km, basis, true);
}

SparseOperator build_block_kernel(BlockTag tag, int sharp, const KernelMatrix& km,
                                  const FockBasis& basis) {
  if (sharp != 1 && sharp != 2)
    throw std::invalid_argument("build_block_kernel: kernel index must be 1 or 2");
  return block_from_columns(tag, sharp, km, basis, true);
}

namespace detail {
SparseOperator build_block_serial(BlockTag tag, const KernelMatrix& km,
                                  const FockBasis& basis) {
  return block_from_columns(tag, standard_kernel(tag), km, basis, false);
}
}  // namespace detail

const SparseOperator& HamiltonianParts::block(BlockTag tag) const {
  switch (tag) {
    case BlockTag::ab: return hab;
    case BlockTag::astbst: return hastbst;
    case BlockTag::astb: return hastb;
    case BlockTag::abst: return habst;
  }
  throw std::logic_error("HamiltonianParts::block: unknown tag");
}

HamiltonianParts build_full(const ModeGrid& grid, const DispersionParams& params,
                            const KernelMatrix& km, const FockBasis& basis) {
  HamiltonianParts parts;
  parts.basis = &basis;
  parts.km = &km;
  parts.w = km.w;
  parts.h0 = build_free(grid, params, basis);
  parts.h0_diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dim()));
  for (int k = 0; k < parts.h0.mat.outerSize(); ++k)
    for (SparseMat::InnerIterator it(parts.h0.mat, k); it; ++it)
      parts.h0_diag(it.row()) = it.value().real();

  parts.hab = build_block(BlockTag::ab, km, basis);
  parts.hastbst = build_block(BlockTag::astbst, km, basis);
  parts.hastb = build_block(BlockTag::astb, km, basis);
  parts.habst = build_block(BlockTag::abst, km, basis);

  parts.h_full =
      parts.h0 + parts.hab + parts.hastbst + parts.hastb + parts.habst;
  if (!parts.h_full.check_hermitian())
    throw std::logic_error("build_full: assembled operator is not Hermitian");
  return parts;
}

double c_lambda(const KernelMatrix& km, const DispersionParams& params) {
  if (!km.grid) throw std::invalid_argument("c_lambda: KernelMatrix missing grid");
  const auto m = static_cast<Eigen::Index>(km.grid->size());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double omega_a =
        dispersion(ParticleKind::Boson, km.grid->centers[j], params);
    const double weight = 1.0 + 1.0 / omega_a;
    for (Eigen::Index i = 0; i < m; ++i)
      sum += weight * (std::norm(km.values1(i, j)) + std::norm(km.values2(i, j)));
  }
  return 1.0 + km.w * km.w * sum;
}

SparseOperator free_resolvent_power(const Eigen::VectorXd& h0_diag, cplx z,
                                    double alpha, double shift) {
  if (z.real() >= 0.0)
    throw std::invalid_argument("free_resolvent_power: Re z must be negative");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("free_resolvent_power: alpha must be in [0, 1]");
  if (shift < 0.0)
    throw std::invalid_argument("free_resolvent_power: shift must be >= 0");
  const auto dim = h0_diag.size();
  if (alpha == 0.0) return SparseOperator::identity(dim);
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    const cplx base = cplx(h0_diag(s) + shift, 0.0) - z;  // Re > 0 by precondition
    trips.emplace_back(static_cast<int>(s), static_cast<int>(s),
                       std::pow(base, -alpha));
  }
  SparseMat mat(dim, dim);
  mat.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(static_cast<std::size_t>(dim), std::move(mat),
                        z.imag() == 0.0);
}

}  // namespace uvlab
