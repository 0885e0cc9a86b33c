#include "uvlab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uvlab {

namespace {

// All multi-indices of length m with sum exactly s, lexicographic.
void states_with_sum(int m, int s, std::vector<int>& scratch,
                     std::vector<std::vector<int>>& out) {
  if (m == 0) {
    if (s == 0) out.push_back(scratch);
    return;
  }
  for (int n = 0; n <= s; ++n) {
    scratch.push_back(n);
    states_with_sum(m - 1, s - n, scratch, out);
    scratch.pop_back();
  }
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::string FockBasis::key(const std::vector<int>& occ) {
  std::string s;
  s.reserve(occ.size() * 3);
  for (int n : occ) {
    s += std::to_string(n);
    s += ',';
  }
  return s;
}

FockBasis::FockBasis(int m_a, int m_f, int boson_cap, std::size_t dim_limit)
    : m_a_(m_a), m_f_(m_f), cap_(boson_cap) {
  if (m_a < 0 || m_f < 0 || boson_cap < 0)
    throw std::invalid_argument("FockBasis: mode counts and cap must be >= 0");
  if (m_f >= 63) throw std::invalid_argument("FockBasis: fermion bitset limited to 62 modes");

  fermion_block_ = std::size_t(1) << m_f_;
  std::size_t n_boson = 0;
  for (int s = 0; s <= cap_; ++s) n_boson += binomial(m_a_ + s - 1, s);
  if (m_a_ == 0) n_boson = 1;
  if (n_boson * fermion_block_ > dim_limit)
    throw std::invalid_argument("FockBasis: dimension exceeds the configured limit");

  // graded-lex: by total quanta, then lexicographic within each grade
  boson_states_.reserve(n_boson);
  if (m_a_ == 0) {
    boson_states_.push_back({});
  } else {
    std::vector<int> scratch;
    scratch.reserve(m_a_);
    for (int s = 0; s <= cap_; ++s) {
      states_with_sum(m_a_, s, scratch, boson_states_);
    }
  }
  boson_index_.reserve(boson_states_.size());
  for (std::size_t r = 0; r < boson_states_.size(); ++r)
    boson_index_.emplace(key(boson_states_[r]), r);
  dim_ = boson_states_.size() * fermion_block_;
}

std::size_t FockBasis::boson_rank(const std::vector<int>& occ) const {
  auto it = boson_index_.find(key(occ));
  if (it == boson_index_.end())
    throw std::out_of_range("FockBasis: boson state outside the truncation");
  return it->second;
}

SparseOperator SparseOperator::identity(std::size_t d) {
  SparseMat m(d, d);
  m.setIdentity();
  return SparseOperator(d, std::move(m), true);
}

SparseOperator SparseOperator::zero(std::size_t d) {
  return SparseOperator(d, SparseMat(d, d), true);
}

SparseOperator SparseOperator::adjoint() const {
  return SparseOperator(dim, SparseMat(mat.adjoint()), hermitian);
}

bool SparseOperator::check_hermitian() {
  SparseMat diff = mat - SparseMat(mat.adjoint());
  double dev = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMat::InnerIterator it(diff, k); it; ++it)
      dev = std::max(dev, std::abs(it.value()));
  hermitian = (dev == 0.0);
  return hermitian;
}

namespace {
void require_same_dim(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim != b.dim)
    throw std::invalid_argument("SparseOperator: dimension mismatch");
}
}  // namespace

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  return SparseOperator(a.dim, SparseMat(a.mat + b.mat), a.hermitian && b.hermitian);
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  return SparseOperator(a.dim, SparseMat(a.mat - b.mat), a.hermitian && b.hermitian);
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  return SparseOperator(a.dim, SparseMat(a.mat * b.mat), false);
}

SparseOperator operator*(cplx s, const SparseOperator& a) {
  return SparseOperator(a.dim, SparseMat(s * a.mat),
                        a.hermitian && s.imag() == 0.0);
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  return SparseOperator(a.dim, SparseMat(a.mat * b.mat - b.mat * a.mat), false);
}

SparseOperator anticommutator(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  return SparseOperator(a.dim, SparseMat(a.mat * b.mat + b.mat * a.mat), false);
}

SparseOperator boson_op(int j, OpKind kind, const FockBasis& basis) {
  if (j < 0 || j >= basis.boson_modes())
    throw std::invalid_argument("boson_op: mode index out of range");
  const auto fb = std::size_t(1) << basis.fermion_modes();
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::size_t r = 0; r < basis.boson_count(); ++r) {
    std::vector<int> occ = basis.boson_state(r);
    const int n = occ[j];
    std::size_t r2;
    double coeff;
    if (kind == OpKind::Annihilate) {
      if (n == 0) continue;
      occ[j] = n - 1;
      coeff = std::sqrt(static_cast<double>(n));
      r2 = basis.boson_rank(occ);
    } else {
      const int total = std::accumulate(occ.begin(), occ.end(), 0);
      if (total >= basis.boson_cap()) continue;  // projective truncation at the cap
      occ[j] = n + 1;
      coeff = std::sqrt(static_cast<double>(n + 1));
      r2 = basis.boson_rank(occ);
    }
    for (std::uint64_t bits = 0; bits < fb; ++bits)
      trips.emplace_back(static_cast<int>(basis.index(r2, bits)),
                         static_cast<int>(basis.index(r, bits)), cplx(coeff, 0.0));
  }
  SparseMat m(basis.dim(), basis.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(basis.dim(), std::move(m), false);
}

SparseOperator fermion_op(int i, OpKind kind, const FockBasis& basis) {
  if (i < 0 || i >= basis.fermion_modes())
    throw std::invalid_argument("fermion_op: mode index out of range");
  const auto fb = std::size_t(1) << basis.fermion_modes();
  const std::uint64_t bit = std::uint64_t(1) << i;
  const std::uint64_t below = bit - 1;
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::uint64_t bits = 0; bits < fb; ++bits) {
    const bool occupied = (bits & bit) != 0;
    if (kind == OpKind::Annihilate ? !occupied : occupied) continue;
    const std::uint64_t bits2 = bits ^ bit;
    const int parity = __builtin_popcountll(bits & below);
    const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t r = 0; r < basis.boson_count(); ++r)
      trips.emplace_back(static_cast<int>(basis.index(r, bits2)),
                         static_cast<int>(basis.index(r, bits)), cplx(sign, 0.0));
  }
  SparseMat m(basis.dim(), basis.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(basis.dim(), std::move(m), false);
}

AlgebraReport algebra_report(const FockBasis& basis) {
  if (basis.dim() > 10000)
    throw std::invalid_argument("algebra_report: basis too large for exhaustive check");
  AlgebraReport rep;
  const std::size_t dim = basis.dim();

  // columns (basis states) strictly below the boson cap, where CCR must be exact
  std::vector<bool> below_cap(dim, false);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const auto& occ = basis.boson_state(basis.boson_rank_of(idx));
    const int total = std::accumulate(occ.begin(), occ.end(), 0);
    if (total < basis.boson_cap()) below_cap[idx] = true;
    else ++rep.cap_boundary_states;
  }

  std::vector<SparseOperator> a, ad, b, bd;
  for (int j = 0; j < basis.boson_modes(); ++j) {
    a.push_back(boson_op(j, OpKind::Annihilate, basis));
    ad.push_back(boson_op(j, OpKind::Create, basis));
  }
  for (int i = 0; i < basis.fermion_modes(); ++i) {
    b.push_back(fermion_op(i, OpKind::Annihilate, basis));
    bd.push_back(fermion_op(i, OpKind::Create, basis));
  }

  const auto max_abs = [](const SparseMat& m) {
    double v = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMat::InnerIterator it(m, k); it; ++it)
        v = std::max(v, std::abs(it.value()));
    return v;
  };
  // max entry over columns below the cap only
  const auto max_abs_subcap = [&](const SparseMat& m) {
    double v = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMat::InnerIterator it(m, k); it; ++it)
        if (below_cap[it.col()]) v = std::max(v, std::abs(it.value()));
    return v;
  };
  const SparseMat id = SparseOperator::identity(dim).mat;

  // CAR: {b_i, b_i'} = 0, {b_i, b_i'*} = delta
  for (int i = 0; i < basis.fermion_modes(); ++i)
    for (int i2 = 0; i2 < basis.fermion_modes(); ++i2) {
      rep.max_car_violation = std::max(
          rep.max_car_violation, max_abs(anticommutator(b[i], b[i2]).mat));
      SparseMat dev = anticommutator(b[i], bd[i2]).mat;
      if (i == i2) dev = SparseMat(dev - id);
      rep.max_car_violation = std::max(rep.max_car_violation, max_abs(dev));
    }

  // CCR below the cap: [a_j, a_j'] = 0, [a_j, a_j'*] = delta
  for (int j = 0; j < basis.boson_modes(); ++j)
    for (int j2 = 0; j2 < basis.boson_modes(); ++j2) {
      rep.max_ccr_violation = std::max(
          rep.max_ccr_violation, max_abs_subcap(commutator(a[j], a[j2]).mat));
      SparseMat dev = commutator(a[j], ad[j2]).mat;
      if (j == j2) dev = SparseMat(dev - id);
      rep.max_ccr_violation = std::max(rep.max_ccr_violation, max_abs_subcap(dev));
    }

  // mixed: [a_j, b_i] = [a_j, b_i*] = 0 (exact, no cap restriction)
  for (int j = 0; j < basis.boson_modes(); ++j)
    for (int i = 0; i < basis.fermion_modes(); ++i) {
      rep.max_mixed_violation = std::max(
          rep.max_mixed_violation, max_abs(commutator(a[j], b[i]).mat));
      rep.max_mixed_violation = std::max(
          rep.max_mixed_violation, max_abs(commutator(a[j], bd[i]).mat));
      rep.max_mixed_violation = std::max(
          rep.max_mixed_violation, max_abs(commutator(ad[j], b[i]).mat));
      rep.max_mixed_violation = std::max(
          rep.max_mixed_violation, max_abs(commutator(ad[j], bd[i]).mat));
    }

  return rep;
}

}  // namespace uvlab
