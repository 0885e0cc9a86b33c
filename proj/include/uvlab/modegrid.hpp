#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace uvlab {

using cplx = std::complex<double>;

/// Masses entering the relativistic dispersion relations.
struct DispersionParams {
  double m_b = 1.0;  ///< boson mass, > 0
  double m_f = 1.0;  ///< fermion mass, > 0

  void validate() const {
    if (m_b <= 0.0 || m_f <= 0.0)
      throw std::invalid_argument("DispersionParams: masses must be positive");
  }
};

enum class ParticleKind { Boson, Fermion };

/// omega(q) = sqrt(|q|^2 + m^2), m picked by particle kind.
double dispersion(ParticleKind kind, const Eigen::Vector3d& q,
                  const DispersionParams& params);

enum class ChiShape { Indicator, SmoothBump };
enum class FShape { BallIndicator, NormalizedBump };

/// UV cutoff chi(|.|/Lambda) and spatial cutoff g(x) = n^d f(n x).
struct CutoffSpec {
  double lambda = 1.0;                      ///< UV cutoff Lambda, > 0
  ChiShape chi_shape = ChiShape::Indicator;
  int n = 1;                                ///< spatial-cutoff scale, >= 1
  FShape f_shape = FShape::BallIndicator;

  void validate() const {
    if (lambda <= 0.0) throw std::invalid_argument("CutoffSpec: Lambda must be positive");
    if (n < 1) throw std::invalid_argument("CutoffSpec: n must be a positive integer");
  }
  /// Support radius of chi (chi vanishes for r > r_chi). Both shapes use r_chi = 1.
  static constexpr double r_chi = 1.0;
};

/// chi(r): bounded by 1, equal to 1 on [0, 1/2], supported in [0, 1].
double chi_cutoff(double r, ChiShape shape);

/// f(x) on the unit ball in dimension d; positive, bounded, integral 1.
double f_profile(const Eigen::Vector3d& x, int d, FShape shape);

/// g(x) = n^d f(n x).
double spatial_cutoff(const Eigen::Vector3d& x, const CutoffSpec& spec, int d);

/// sup of f over the unit ball (used for the bounded-kernel check).
double f_sup(int d, FShape shape);

/// Volume of the d-dimensional unit ball.
double unit_ball_volume(int d);

/// Kernel data: G^sharp(k,q) = lambda_c * h^sharp(k,q) g(k -/+ q) chi chi / omega_a(q)^p.
struct KernelSpec {
  using CoeffFn = std::function<cplx(const Eigen::Vector3d&, const Eigen::Vector3d&)>;

  double p = 0.5;       ///< dispersion exponent, >= 0
  CoeffFn h1;           ///< bounded coefficient for G^(1); null means h == 1
  CoeffFn h2;           ///< bounded coefficient for G^(2); null means h == 1
  double h1_sup = 1.0;  ///< recorded sup |h1|
  double h2_sup = 1.0;  ///< recorded sup |h2|
  double coupling = 1.0;

  void validate() const {
    if (p < 0.0) throw std::invalid_argument("KernelSpec: p must be >= 0");
    if (!(h1_sup < std::numeric_limits<double>::infinity()) ||
        !(h2_sup < std::numeric_limits<double>::infinity()))
      throw std::invalid_argument("KernelSpec: sup|h| must be finite");
  }
};

/// Uniform midpoint tensor grid on [-Q_max, Q_max]^d.
struct ModeGrid {
  int d = 1;
  std::vector<Eigen::Vector3d> centers;  ///< lexicographic order, unused components zero
  double w = 1.0;                        ///< cell volume
  double q_max = 1.0;

  std::size_t size() const { return centers.size(); }
};

ModeGrid build_grid(int d, double q_max, int cells_per_axis);

/// G^(1), G^(2) sampled on grid pairs (fermion cell i, boson cell j).
struct KernelMatrix {
  Eigen::MatrixXcd values1;  ///< G^(1)_Lambda(k_i, q_j)
  Eigen::MatrixXcd values2;  ///< G^(2)_Lambda(k_i, q_j)
  double w = 1.0;
  const ModeGrid* grid = nullptr;

  const Eigen::MatrixXcd& values(int sharp) const {
    return sharp == 1 ? values1 : values2;
  }
};

/// Pointwise kernel evaluation; sharp = 1 uses g(k - q), sharp = 2 uses g(k + q).
cplx kernel_value(int sharp, const Eigen::Vector3d& k, const Eigen::Vector3d& q,
                  const KernelSpec& kspec, const CutoffSpec& cspec,
                  const DispersionParams& params, int d);

/// Samples both kernels on the grid. OpenMP-parallel over rows.
KernelMatrix kernel_matrix(const KernelSpec& kspec, const CutoffSpec& cspec,
                           const DispersionParams& params, const ModeGrid& grid);

namespace detail {
/// Serial reference used by tests and the benchmark.
KernelMatrix kernel_matrix_serial(const KernelSpec& kspec, const CutoffSpec& cspec,
                                  const DispersionParams& params, const ModeGrid& grid);
}  // namespace detail

}  // namespace uvlab
