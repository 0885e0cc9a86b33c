#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace uvlab {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx>;

/// Truncated occupation basis: bosonic multi-indices with a total-quanta cap,
/// tensored with fermionic bitsets over M_f modes.
///
/// State index layout: index = boson_rank * 2^M_f + fermion_bits, with boson
/// multi-indices enumerated in graded lexicographic order.
class FockBasis {
 public:
  static constexpr std::size_t kDefaultDimLimit = 200000;

  FockBasis(int m_a, int m_f, int boson_cap,
            std::size_t dim_limit = kDefaultDimLimit);

  int boson_modes() const { return m_a_; }
  int fermion_modes() const { return m_f_; }
  int boson_cap() const { return cap_; }
  std::size_t dim() const { return dim_; }

  std::size_t boson_count() const { return boson_states_.size(); }
  const std::vector<int>& boson_state(std::size_t rank) const { return boson_states_[rank]; }
  /// Rank of a boson multi-index; throws if the state exceeds the cap.
  std::size_t boson_rank(const std::vector<int>& occ) const;

  std::size_t index(std::size_t boson_rank, std::uint64_t fermion_bits) const {
    return boson_rank * fermion_block_ + fermion_bits;
  }
  std::size_t boson_rank_of(std::size_t idx) const { return idx / fermion_block_; }
  std::uint64_t fermion_bits_of(std::size_t idx) const { return idx % fermion_block_; }

 private:
  int m_a_, m_f_, cap_;
  std::size_t dim_, fermion_block_;
  std::vector<std::vector<int>> boson_states_;
  std::unordered_map<std::string, std::size_t> boson_index_;

  static std::string key(const std::vector<int>& occ);
};

enum class OpKind { Annihilate, Create };

/// Complex sparse matrix over one FockBasis with a Hermitian tag.
struct SparseOperator {
  std::size_t dim = 0;
  SparseMat mat;
  bool hermitian = false;

  SparseOperator() = default;
  SparseOperator(std::size_t d, SparseMat m, bool herm = false)
      : dim(d), mat(std::move(m)), hermitian(herm) {}

  static SparseOperator identity(std::size_t d);
  static SparseOperator zero(std::size_t d);

  SparseOperator adjoint() const;
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(mat); }

  /// Exact entrywise check A == A^dagger; updates the flag.
  bool check_hermitian();
};

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator*(cplx s, const SparseOperator& a);
SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);
SparseOperator anticommutator(const SparseOperator& a, const SparseOperator& b);

/// Bosonic ladder operator for mode j. Creation annihilates states at the
/// total cap (projective truncation).
SparseOperator boson_op(int j, OpKind kind, const FockBasis& basis);

/// Fermionic ladder operator for mode i in the Jordan-Wigner convention:
/// sign (-1)^(number of occupied modes with index < i).
SparseOperator fermion_op(int i, OpKind kind, const FockBasis& basis);

/// Exhaustive CCR/CAR verification on small bases.
struct AlgebraReport {
  double max_car_violation = 0.0;    ///< CAR, exact everywhere
  double max_ccr_violation = 0.0;    ///< CCR restricted below the boson cap
  double max_mixed_violation = 0.0;  ///< [a, b] = [a, b*] = 0
  std::size_t cap_boundary_states = 0;
  bool pass(double tol = 1e-12) const {
    return max_car_violation <= tol && max_ccr_violation <= tol &&
           max_mixed_violation <= tol;
  }
};

AlgebraReport algebra_report(const FockBasis& basis);

}  // namespace uvlab
