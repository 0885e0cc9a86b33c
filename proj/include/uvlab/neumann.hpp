#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "uvlab/hamiltonian.hpp"

namespace uvlab {

/// One concrete operator word inside a block set: sign * B1 R0 B2 R0 B3
/// (one to three ladder blocks, full resolvents in between), optionally with
/// the scalar second-order shift added (the compensated product).
struct GVariant {
  std::vector<std::pair<BlockTag, int>> blocks;  ///< (tag, kernel index 1 or 2)
  double sign = 1.0;
  bool add_e2 = false;
  int shadow_multiplicity = 1;  ///< raw monomials collected into this word
  std::string label;
};

struct GSet {
  int j = 0;
  int n_op = 0;    ///< number of kernels in each variant
  double nu = 0.0, mu = 0.0;
  std::vector<GVariant> variants;
};

/// Reading of the two block-set entries whose published kernel superscripts
/// conflict with the kernel/block pairing used everywhere else.
enum class CatalogConvention { PairingRule, LiteralLetters };

/// The two published versions of the adjacency constraint list.
enum class AdjacencyRule { Standard, Alternate };

struct GSetCatalog {
  CatalogConvention convention = CatalogConvention::PairingRule;
  std::vector<GSet> sets;  ///< j = 1..7

  const GSet& set(int j) const { return sets.at(j - 1); }
  int n_op(int j) const { return set(j).n_op; }
  std::pair<double, double> exponents(int j) const {
    return {set(j).nu, set(j).mu};
  }
  std::size_t total_variants() const;
};

GSetCatalog catalog(CatalogConvention conv = CatalogConvention::PairingRule);

/// A word over the catalog: list of (set index j, variant index).
struct AdmissibleSequence {
  std::vector<std::pair<int, int>> terms;
  int total_weight = 0;
};

/// Whether j2 may directly follow j1 (adjacency rule) and whether the
/// exponent budget mu(j1) + nu(j2) <= 1 holds.
bool adjacency_allowed(int j1, int j2, AdjacencyRule rule = AdjacencyRule::Standard);
bool exponents_compatible(const GSetCatalog& cat, int j1, int j2);

/// All admissible words of total weight exactly k, in deterministic order
/// (lexicographic in (j, variant) along the word).
std::vector<AdmissibleSequence> enumerate_sequences(
    int k, const GSetCatalog& cat = catalog(),
    AdjacencyRule rule = AdjacencyRule::Standard, int depth_limit = 12);

/// R0^(1-nu_1) prod_i [ (R0^nu T_i R0^mu) R0^(1-mu_i-nu_(i+1)) ], the split
/// form of R0 prod(T_i R0); identical to the plain product on finite
/// matrices but exposes the individually bounded factors.
SparseOperator term_matrix(const AdmissibleSequence& seq, cplx z,
                           const HamiltonianParts& parts, double e2,
                           const GSetCatalog& cat = catalog());

/// Measured norms of the split factors of one term (for logging against the
/// bound constants).
std::vector<double> term_factor_norms(const AdmissibleSequence& seq, cplx z,
                                      const HamiltonianParts& parts, double e2,
                                      const GSetCatalog& cat = catalog());

struct SeriesResult {
  SparseOperator partial;
  std::vector<double> term_norms;  ///< Frobenius norm per order / weight
  bool diverging = false;          ///< norms non-decreasing over 5 orders
};

/// Partial sum to order N of R0 sum_k { -(H_I - e2) R0 }^k.
SeriesResult raw_series_partial(cplx z, int N, const HamiltonianParts& parts,
                                double e2);

/// Partial sum over weights k <= K of all admissible words.
SeriesResult reordered_series_partial(cplx z, int K, const HamiltonianParts& parts,
                                      double e2,
                                      const GSetCatalog& cat = catalog(),
                                      AdjacencyRule rule = AdjacencyRule::Standard);

struct ResolventFamilyReport {
  double adjoint_deviation = 0.0;    ///< || R(z1)^dag - R(conj z1) ||
  double identity_deviation = 0.0;   ///< first resolvent identity at (z1, z2)
  std::vector<double> approx_identity;  ///< ||z R(z) psi - psi|| along the schedule
  bool approx_identity_decreasing = false;
};

using ResolventProvider = std::function<SparseOperator(cplx)>;

/// Checks the defining properties of a resolvent family on a provider.
/// `schedule` lists Re z values (increasingly negative) for the strong
/// approximate-identity check. The axioms are stated for the (z - H)^(-1)
/// orientation; series partial sums approximate (H - e2 - z)^(-1), so pass
/// their negation.
ResolventFamilyReport resolvent_family_check(cplx z1, cplx z2,
                                             const ResolventProvider& provider,
                                             const std::vector<double>& schedule);

/// Coefficients of the scalar shadow of the raw series, where every ladder
/// block letter is an indeterminate of weight 1 and the scalar shift letter
/// has weight 2: c_k = 4 c_(k-1) + c_(k-2).
std::vector<std::uint64_t> raw_shadow_coefficients(int k_max);

/// Same coefficients recovered from the admissible-word enumeration, each
/// word weighted by the number of raw monomials it collects.
std::vector<std::uint64_t> reordered_shadow_coefficients(
    int k_max, const GSetCatalog& cat = catalog(),
    AdjacencyRule rule = AdjacencyRule::Standard);

}  // namespace uvlab
