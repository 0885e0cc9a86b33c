#pragma once

#include "uvlab/fock.hpp"
#include "uvlab/modegrid.hpp"

namespace uvlab {

/// The four interaction blocks. Kernel pairing is fixed: {ab, a*b*} carry the
/// second kernel, {a*b, ab*} the first.
enum class BlockTag { ab, astbst, astb, abst };

/// Free part, interaction blocks and the assembled operator on one basis.
struct HamiltonianParts {
  SparseOperator h0;      ///< diagonal
  Eigen::VectorXd h0_diag;
  SparseOperator hab, hastbst, hastb, habst;
  SparseOperator h_full;
  const FockBasis* basis = nullptr;
  const KernelMatrix* km = nullptr;
  double w = 1.0;

  /// The cached block for a (tag, kernel) pair under the standard pairing;
  /// throws for mismatched pairs (those must be rebuilt explicitly).
  const SparseOperator& block(BlockTag tag) const;
};

/// Diagonal free Hamiltonian: entry per state is the occupation-weighted sum
/// of dispersions (fermion mode i at grid cell i, boson mode j at cell j).
SparseOperator build_free(const ModeGrid& grid, const DispersionParams& params,
                          const FockBasis& basis);

/// One interaction block, weight convention sum_ij w * G[i,j] * (ladder pair):
///   ab    : w G2[i,j]        b_i a_j
///   a*b*  : w conj(G2[i,j])  b*_i a*_j
///   a*b   : w conj(G1[i,j])  b_i  a*_j
///   ab*   : w G1[i,j]        b*_i a_j
/// OpenMP-parallel over source states.
SparseOperator build_block(BlockTag tag, const KernelMatrix& km,
                           const FockBasis& basis);

/// Same ladder structure with an explicitly chosen kernel (1 or 2),
/// overriding the standard pairing.
SparseOperator build_block_kernel(BlockTag tag, int sharp, const KernelMatrix& km,
                                  const FockBasis& basis);

/// Kernel index the standard pairing assigns to a tag (2 for {ab, a*b*},
/// 1 for {a*b, ab*}).
int standard_kernel(BlockTag tag);

namespace detail {
SparseOperator build_block_serial(BlockTag tag, const KernelMatrix& km,
                                  const FockBasis& basis);
}

/// Assembles all parts and the full operator; throws if the exact Hermiticity
/// check fails (that would be an assembly bug, not a numerical issue).
HamiltonianParts build_full(const ModeGrid& grid, const DispersionParams& params,
                            const KernelMatrix& km, const FockBasis& basis);

/// Lower-bound constant: 1 + sum_ij w^2 (1 + 1/omega_a(q_j)) (|G1|^2 + |G2|^2).
double c_lambda(const KernelMatrix& km, const DispersionParams& params);

/// Diagonal (E_s - z + C)^(-alpha), principal branch; alpha = 0 gives the
/// identity. Requires Re z < 0 and C >= 0 so all entries stay invertible.
SparseOperator free_resolvent_power(const Eigen::VectorXd& h0_diag, cplx z,
                                    double alpha, double shift = 0.0);

}  // namespace uvlab
