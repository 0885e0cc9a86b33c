#include "uvlab/modegrid.hpp"

#include <cmath>
#include <limits>

namespace uvlab {

double dispersion(ParticleKind kind, const Eigen::Vector3d& q,
                  const DispersionParams& params) {
  const double m = (kind == ParticleKind::Boson) ? params.m_b : params.m_f;
  return std::sqrt(q.squaredNorm() + m * m);
}

double chi_cutoff(double r, ChiShape shape) {
  r = std::abs(r);
  switch (shape) {
    case ChiShape::Indicator:
      return r <= 1.0 ? 1.0 : 0.0;
    case ChiShape::SmoothBump: {
      if (r <= 0.5) return 1.0;
      if (r >= 1.0) return 0.0;
      // C^inf transition on (1/2, 1)
      const auto h = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
      const double a = h(1.0 - r);
      const double b = h(r - 0.5);
      return a / (a + b);
    }
  }
  return 0.0;
}

double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return M_PI;
    case 3: return 4.0 * M_PI / 3.0;
    default: throw std::invalid_argument("unit_ball_volume: d must be 1, 2 or 3");
  }
}

namespace {

// Normalization constant of the C^inf bump exp(-1/(1-|x|^2)) on the unit
// ball, computed once per dimension by radial midpoint quadrature.
double bump_norm_constant(int d) {
  static double cache[4] = {0.0, 0.0, 0.0, 0.0};
  if (cache[d] != 0.0) return cache[d];
  const int n_pts = 200000;
  const double surf[4] = {0.0, 2.0, 2.0 * M_PI, 4.0 * M_PI};
  double integral = 0.0;
  const double dr = 1.0 / n_pts;
  for (int i = 0; i < n_pts; ++i) {
    const double r = (i + 0.5) * dr;
    integral += surf[d] * std::pow(r, d - 1) * std::exp(-1.0 / (1.0 - r * r)) * dr;
  }
  cache[d] = 1.0 / integral;
  return cache[d];
}

}  // namespace

double f_profile(const Eigen::Vector3d& x, int d, FShape shape) {
  const double r2 = x.squaredNorm();
  if (r2 > 1.0) return 0.0;
  switch (shape) {
    case FShape::BallIndicator:
      return 1.0 / unit_ball_volume(d);
    case FShape::NormalizedBump:
      if (r2 >= 1.0) return 0.0;
      return bump_norm_constant(d) * std::exp(-1.0 / (1.0 - r2));
  }
  return 0.0;
}

double f_sup(int d, FShape shape) {
  switch (shape) {
    case FShape::BallIndicator: return 1.0 / unit_ball_volume(d);
    case FShape::NormalizedBump: return bump_norm_constant(d) * std::exp(-1.0);
  }
  return 0.0;
}

double spatial_cutoff(const Eigen::Vector3d& x, const CutoffSpec& spec, int d) {
  const double nd = std::pow(static_cast<double>(spec.n), d);
  return nd * f_profile(spec.n * x, d, spec.f_shape);
}

ModeGrid build_grid(int d, double q_max, int cells_per_axis) {
  if (d < 1 || d > 3) throw std::invalid_argument("build_grid: d must be 1, 2 or 3");
  if (cells_per_axis < 1) throw std::invalid_argument("build_grid: cells_per_axis >= 1");
  if (q_max <= 0.0) throw std::invalid_argument("build_grid: Q_max must be positive");

  ModeGrid grid;
  grid.d = d;
  grid.q_max = q_max;
  const double h = 2.0 * q_max / cells_per_axis;
  grid.w = std::pow(h, d);

  std::vector<double> axis(cells_per_axis);
  for (int i = 0; i < cells_per_axis; ++i) axis[i] = -q_max + (i + 0.5) * h;

  // lexicographic over (x, y, z), trailing axes only for d >= 2, 3
  const int ny = d >= 2 ? cells_per_axis : 1;
  const int nz = d >= 3 ? cells_per_axis : 1;
  grid.centers.reserve(static_cast<std::size_t>(cells_per_axis) * ny * nz);
  for (int ix = 0; ix < cells_per_axis; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int iz = 0; iz < nz; ++iz) {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        c[0] = axis[ix];
        if (d >= 2) c[1] = axis[iy];
        if (d >= 3) c[2] = axis[iz];
        grid.centers.push_back(c);
      }
  return grid;
}

cplx kernel_value(int sharp, const Eigen::Vector3d& k, const Eigen::Vector3d& q,
                  const KernelSpec& kspec, const CutoffSpec& cspec,
                  const DispersionParams& params, int d) {
  const double chi = chi_cutoff(k.norm() / cspec.lambda, cspec.chi_shape) *
                     chi_cutoff(q.norm() / cspec.lambda, cspec.chi_shape);
  if (chi == 0.0) return cplx(0.0, 0.0);
  const Eigen::Vector3d arg = (sharp == 1) ? Eigen::Vector3d(k - q) : Eigen::Vector3d(k + q);
  const double g = spatial_cutoff(arg, cspec, d);
  if (g == 0.0) return cplx(0.0, 0.0);
  const auto& h = (sharp == 1) ? kspec.h1 : kspec.h2;
  const cplx hval = h ? h(k, q) : cplx(1.0, 0.0);
  const double omega_a = dispersion(ParticleKind::Boson, q, params);
  return kspec.coupling * hval * g * chi / std::pow(omega_a, kspec.p);
}

namespace detail {

KernelMatrix kernel_matrix_serial(const KernelSpec& kspec, const CutoffSpec& cspec,
                                  const DispersionParams& params, const ModeGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  KernelMatrix km;
  km.w = grid.w;
  km.grid = &grid;
  km.values1.resize(m, m);
  km.values2.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      km.values1(i, j) = kernel_value(1, grid.centers[i], grid.centers[j], kspec, cspec, params, grid.d);
      km.values2(i, j) = kernel_value(2, grid.centers[i], grid.centers[j], kspec, cspec, params, grid.d);
    }
  return km;
}

}  // namespace detail

KernelMatrix kernel_matrix(const KernelSpec& kspec, const CutoffSpec& cspec,
                           const DispersionParams& params, const ModeGrid& grid) {
  kspec.validate();
  cspec.validate();
  params.validate();
  const auto m = static_cast<Eigen::Index>(grid.size());
  KernelMatrix km;
  km.w = grid.w;
  km.grid = &grid;
  km.values1.resize(m, m);
  km.values2.resize(m, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      km.values1(i, j) = kernel_value(1, grid.centers[i], grid.centers[j], kspec, cspec, params, grid.d);
      km.values2(i, j) = kernel_value(2, grid.centers[i], grid.centers[j], kspec, cspec, params, grid.d);
    }
  return km;
}

}  // namespace uvlab
