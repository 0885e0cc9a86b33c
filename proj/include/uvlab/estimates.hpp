#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "uvlab/hamiltonian.hpp"

namespace uvlab {

/// Outcome of one measured-ratio audit of an operator inequality on the
/// truncated space. `max_ratio` is the largest measured LHS/RHS over the
/// sampled configurations, with the published constant factored out of the
/// RHS, so `pass` means max_ratio <= bound_constant (within a 1e-9 slack).
struct AuditReport {
  std::string lemma_id;
  int samples = 0;
  double max_ratio = 0.0;
  double bound_constant = 1.0;
  bool pass = false;
  std::string worst_config;  ///< descriptor of the maximizing sample

  void finalize() { pass = max_ratio <= bound_constant + 1e-9; }
};

/// Shared read-only inputs for the audits: one grid, one truncated basis and
/// the free diagonal built from them.
struct AuditContext {
  const ModeGrid* grid = nullptr;
  const FockBasis* basis = nullptr;
  DispersionParams params;
  Eigen::VectorXd h0_diag;
  double w = 1.0;
};

AuditContext make_audit_context(const ModeGrid& grid, const FockBasis& basis,
                                const DispersionParams& params);

/// Smeared fermion annihilator b(F) = sum_i sqrt(w) F_i b_i and its
/// discrete L2 norm sqrt(sum_i w |F_i|^2).
SparseOperator smeared_fermion(const Eigen::VectorXcd& f, const AuditContext& ctx);
double smeared_norm(const Eigen::VectorXcd& f, double w);

/// Regularized-annihilator bound: both orderings of
///   (H0 - z + C)^alpha b(F) (H0 - z + C')^(-alpha)
/// have norm at most 2 ||F||. Requires Re z < -1, C' >= C >= 0, alpha in [0,1].
AuditReport audit_fermion_bound(const Eigen::VectorXcd& f, cplx z, double c,
                                double cprime, double alpha,
                                const AuditContext& ctx);

/// Mode-weighted square sums: for weights
///   omega(.)[omega(.) + |Re z|]^(2(delta+gamma)-1)
/// the sum over modes of the squared vector norms of
///   (H0 - z + omega + C)^(-delta) X (H0 - z + C')^(-gamma) Psi
/// is bounded by 4 ||F||^2 ||Psi||^2 when X pairs one ladder operator with
/// b(F) (four variants), and by ||Psi||^2 when X is a single ladder operator
/// (two variants). Requires delta, gamma >= 0 and 1/2 <= delta+gamma <= 1.
/// Returns the two reports in that order.
std::vector<AuditReport> audit_asharp(const Eigen::VectorXcd& f, cplx z,
                                      double delta, double gamma, double c,
                                      double cprime, const AuditContext& ctx,
                                      const std::vector<Eigen::VectorXcd>& psis);

/// Convenience overload probing seeded random states.
std::vector<AuditReport> audit_asharp(const Eigen::VectorXcd& f, cplx z,
                                      double delta, double gamma, double c,
                                      double cprime, const AuditContext& ctx,
                                      int psi_samples = 4,
                                      std::uint64_t seed = 1);

/// Per-column operator bound: for each boson mode q_j,
///   ||(H0 - z + omega_a(q_j) + C)^(-delta) b(F(., q_j)) (H0 - z + C')^(-gamma)||
/// is at most the two-term weighted column norm
///   sqrt(sum_i w |F_ij|^2 / (omega_b [omega_b + |Re z|]^(2(delta+gamma)-1)))
/// + sqrt(sum_i w |F_ij|^2 / ([omega_a + |Re z|]^(2 delta)
///                            [omega_a + omega_b + |Re z|]^(2 gamma))).
/// Requires delta, gamma in [0,1] and delta + gamma >= 1/2.
AuditReport audit_reg_term_alone(const Eigen::MatrixXcd& f, cplx z, double delta,
                                 double gamma, double c, double cprime,
                                 const AuditContext& ctx);

/// Weighted-integral power shift: the ratio of
///   sum_ij w^2 |F_ij|^2 / (omega_a^a0 [omega_a+lambda]^a1
///                          omega_b^a2 [omega_b+lambda]^a3)
/// for the two exponent quadruples stays bounded uniformly over the lambda
/// grid whenever a0'+a2' = a0+a2 and a1'+a3' = a1+a3. The hidden constant is
/// certified against the configurable ceiling, not a specific value.
AuditReport audit_power_shift(const Eigen::MatrixXcd& f,
                              const std::vector<double>& lambda_grid,
                              const std::array<double, 4>& expo,
                              const std::array<double, 4>& expo_primed,
                              const ModeGrid& grid, double w,
                              const DispersionParams& params,
                              double ceiling = 32.0);

/// The block/resolvent combinations whose norms are measured against the
/// three weighted kernel-norm constants.
enum class BlockCombo {
  LoweringSingle,   ///< one block with a fractional resolvent power vs K1
  PairCompensated,  ///< ab R0 a*b* + E(F,G), wrapped both sides, vs K2
  PairSameSide,     ///< ab R0 a*b (and its adjoint form) vs K2
  PairExchange,     ///< ab* R0 a*b wrapped both sides vs K2
  TripleToLower,    ///< ab R0 ab* R0 a*b* (and mirror) vs K3
  TripleToRaise     ///< ab* R0 ab* R0 a*b* (and mirror) vs K3
};

/// kernels: 1 matrix for LoweringSingle, 2 for the pair combos, 3 for the
/// triples. exponents: {beta} resp. {gamma, delta} per the combo's hypothesis.
/// LoweringSingle has the sharp constant 1; the others are measured against
/// the ceiling.
AuditReport audit_block_bounds(BlockCombo combo,
                               const std::vector<Eigen::MatrixXcd>& kernels,
                               cplx z, const std::vector<double>& exponents,
                               const AuditContext& ctx, double ceiling = 32.0);

/// Compensation functional -sum w^2 |F G| / (omega_b + omega_a); coincides
/// bit-for-bit with e2_discrete when both kernels are the pair kernel.
double audit_e_fg(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& g,
                  const ModeGrid& grid, double w, const DispersionParams& params);

/// Seeded randomized sweep over all audits: random kernels bounded by 1,
/// random z in [-50, -2], random admissible exponents, merged per lemma id
/// in a fixed order.
struct AuditSuiteConfig {
  int configs = 100;
  std::uint64_t seed = 0xa0d17u;
  int cells = 2;          ///< grid cells (d = 1)
  double q_max = 1.5;
  int boson_cap = 2;
  double ceiling = 32.0;  ///< hidden-constant ceiling
};

std::vector<AuditReport> run_audit_suite(const AuditSuiteConfig& cfg);

}  // namespace uvlab
