#pragma once

#include <cstdint>

#include "uvlab/modegrid.hpp"

namespace uvlab {

enum class QuadMethod { TensorMidpoint, AdaptiveRadial, MonteCarlo };

struct QuadratureSpec {
  QuadMethod method = QuadMethod::AdaptiveRadial;
  int resolution = 32;          ///< points per axis (tensor) / inner-integral resolution
  long max_evals = 40000000;    ///< evaluation budget
  double error_target = 1e-6;
  std::uint64_t seed = 0x5eedULL;  ///< monte-carlo only, recorded

  void validate() const {
    if (error_target <= 0.0)
      throw std::invalid_argument("QuadratureSpec: error target must be positive");
    if (resolution < 2) throw std::invalid_argument("QuadratureSpec: resolution >= 2");
  }
};

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;  ///< false if the budget ran out before the target
  long evals = 0;
};

/// Compensation functional for a pair of kernels on one grid:
/// -sum_ij w^2 |F[i,j] G[i,j]| / (omega_b(k_i) + omega_a(q_j)). Always <= 0.
double e_pair_discrete(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& g,
                       const ModeGrid& grid, double w,
                       const DispersionParams& params);

/// Second-order energy shift on the discrete grid: e_pair_discrete of the
/// pair-creation kernel with itself. Always <= 0.
double e2_discrete(const KernelMatrix& km, const DispersionParams& params);

/// Continuum counterpart of e2_discrete as a 2d-dimensional integral,
/// evaluated after the substitution v = n(k+q) that resolves the concentrated
/// factor g(k+q)^2.
QuadResult e2_quadrature(const KernelSpec& kspec, const CutoffSpec& cspec,
                         const DispersionParams& params, int d,
                         const QuadratureSpec& qspec);

/// sqrt( sum_ij w^2 |F[i,j]|^2 / ([omega_b(k_i)+|Re z|]^(2 beta - 1) omega_b(k_i)) ).
/// Requires Re z < -1 and beta in [1/2, 1].
double k1_constant(cplx z, double beta, const Eigen::MatrixXcd& f,
                   const ModeGrid& grid, double w, const DispersionParams& params);

/// Product A(F) A(G) with
/// A(F) = sqrt( sum_ij w^2 |F|^2 / (omega_a(q_j) [omega_a(q_j)+|Re z|]^beta) ).
/// Requires Re z < -1 and beta in [0, 2].
double k2_constant(cplx z, double beta, const Eigen::MatrixXcd& f,
                   const Eigen::MatrixXcd& g, const ModeGrid& grid, double w,
                   const DispersionParams& params);

/// Product over three kernels of
/// sqrt( sum_ij w^2 |F_i|^2 / (omega_b(k) [omega_b(k)+|Re z|]^(1/3 + 2 gamma/3)) ).
/// Requires Re z < -1 and gamma in [0, 1].
double k3_constant(cplx z, double gamma, const Eigen::MatrixXcd& f1,
                   const Eigen::MatrixXcd& f2, const Eigen::MatrixXcd& f3,
                   const ModeGrid& grid, double w, const DispersionParams& params);

/// Minimal admissible weight exponents for the three bound families, and
/// whether the fixed split (3/4, 1/2, 1/4) satisfies all of them strictly.
struct ThresholdReport {
  int d = 1;
  double p = 0.5;
  double beta_min_k1 = 0.0;  ///< d/2 - p
  double beta_min_k2 = 0.0;  ///< d - 2p - 1
  double beta_min_k3 = 0.0;  ///< 3d/2 - 3p - 2
  bool scheme_feasible = false;
};

ThresholdReport thresholds(int d, double p);

}  // namespace uvlab
