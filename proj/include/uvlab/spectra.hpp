#pragma once

#include <vector>

#include "uvlab/counterterm.hpp"
#include "uvlab/hamiltonian.hpp"
#include "uvlab/linalg.hpp"

namespace uvlab {

/// Ground-state energy with the achieved residual ||Hv - Ev||.
struct GroundResult {
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Smallest eigenvalue of a Hermitian operator (dense below dim 2048,
/// Lanczos with a deterministic all-ones start above). Throws on
/// non-convergence within the iteration budget.
GroundResult ground_energy(const SparseOperator& h, double tol = 1e-9);

/// One model + discretization description shared by the spectral studies.
/// `kernel.coupling` is the interaction strength; `cutoff.lambda` is the UV
/// cutoff (overridden per row in sweeps).
struct SpectralConfig {
  int d = 1;
  DispersionParams masses;
  KernelSpec kernel;
  CutoffSpec cutoff;
  double q_max = 1.0;
  int cells_per_axis = 2;
  int boson_cap = 2;
  double tol = 1e-9;
};

/// Quadratic-coefficient fit of the ground energy in the coupling.
/// `c2_fit` comes from Richardson extrapolation of E(lambda)/lambda^2 toward
/// lambda = 0 over the grid; it is compared against the discrete second-order
/// shift at unit coupling. `fit_unstable` is set when the fitted quartic term
/// dominates the quadratic one at the largest grid point.
struct PerturbationReport {
  double c2_fit = 0.0;
  double e2 = 0.0;  ///< e2_discrete at unit coupling
  double relative_mismatch = 0.0;
  bool fit_unstable = false;
  std::vector<double> lambdas;   ///< sorted coupling grid
  std::vector<double> energies;  ///< ground energies per grid point
};

/// The coupling grid must be positive with at least two distinct points;
/// values above `lambda_max` are rejected.
PerturbationReport perturbation_check(const SpectralConfig& cfg,
                                      std::vector<double> lambda_grid,
                                      double lambda_max = 0.05);

/// One cutoff value of a renormalized-energy sweep.
struct SweepRow {
  double lambda_uv = 0.0;      ///< UV cutoff of this row
  double e_lambda = 0.0;       ///< ground energy
  double e2 = 0.0;             ///< discrete second-order shift
  double renormalized = 0.0;   ///< e_lambda - e2
  double c_lambda = 0.0;       ///< lower-bound constant
  double gap = 0.0;            ///< first spectral gap
  double residual = 0.0;       ///< eigensolver residual
};

struct SweepResult {
  std::vector<SweepRow> rows;
  // configuration echo
  int d = 1;
  double p = 0.5;
  double m_b = 1.0, m_f = 1.0;
  int n = 1;
  double q_max = 1.0;
  int cells_per_axis = 1;
  int boson_cap = 0;
  double coupling = 0.0;
  // diagnostics
  std::vector<double> renorm_deltas;  ///< |Delta renormalized| between rows
  bool stabilizing = false;   ///< deltas non-increasing over the last 3 steps
  bool bound_violated = false;  ///< any row with e_lambda < -c_lambda
};

/// One row per cutoff at fixed grid and Fock truncation, so only the UV
/// effect varies along the sweep. Requires a strictly increasing cutoff list
/// with q_max >= max(cutoffs) * r_chi. Rows are computed in parallel and
/// assembled in cutoff order.
SweepResult renormalized_sweep(const SpectralConfig& cfg,
                               const std::vector<double>& lambda_list);

/// Operator norm of (H1 - e2_1 - z)^(-1) - (H2 - e2_2 - z)^(-1), measured by
/// power iteration on the implicitly applied difference; each application
/// costs two sparse triangular solves from cached LU factorizations. Both
/// Hamiltonians must live on the same basis and Re z must sit strictly below
/// both spectra shifts (the guaranteed region is Re z < -25 max C^2).
double resolvent_distance(const HamiltonianParts& p1, const HamiltonianParts& p2,
                          cplx z, double e2_1, double e2_2, double tol = 1e-8);

/// Default probe point -2 (1 + 25 c_max^2), safely inside every guaranteed
/// resolvent region for lower-bound constants up to c_max.
cplx default_probe(double c_max);

}  // namespace uvlab
