#include "uvlab/counterterm.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace uvlab {

double e_pair_discrete(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& g,
                       const ModeGrid& grid, double w,
                       const DispersionParams& params) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (f.rows() != m || f.cols() != m || g.rows() != m || g.cols() != m)
    throw std::invalid_argument("e_pair_discrete: kernel shape must match the grid");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double omega_a =
        dispersion(ParticleKind::Boson, grid.centers[j], params);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double mag2 = std::norm(f(i, j)) * std::norm(g(i, j));
      if (mag2 == 0.0) continue;
      const double omega_b =
          dispersion(ParticleKind::Fermion, grid.centers[i], params);
      sum += std::sqrt(mag2) / (omega_b + omega_a);
    }
  }
  return -w * w * sum;
}

double e2_discrete(const KernelMatrix& km, const DispersionParams& params) {
  if (!km.grid) throw std::invalid_argument("e2_discrete: KernelMatrix missing grid");
  return e_pair_discrete(km.values2, km.values2, *km.grid, km.w, params);
}

namespace {

// |G2(k, q)|^2 / (omega_b(k) + omega_a(q)) after the substitution v = n(k+q):
// the n^(2d) from g^2 combines with the Jacobian n^(-d) into an overall n^d
// handled by the caller.
struct E2Integrand {
  const KernelSpec& kspec;
  const CutoffSpec& cspec;
  const DispersionParams& params;
  int d;

  double operator()(const Eigen::Vector3d& v, const Eigen::Vector3d& q) const {
    const double fv = f_profile(v, d, cspec.f_shape);
    if (fv == 0.0) return 0.0;
    const Eigen::Vector3d k = v / cspec.n - q;
    const double chi = chi_cutoff(k.norm() / cspec.lambda, cspec.chi_shape) *
                       chi_cutoff(q.norm() / cspec.lambda, cspec.chi_shape);
    if (chi == 0.0) return 0.0;
    double h2 = 1.0;
    if (kspec.h2) h2 = std::norm(kspec.h2(k, q));
    const double omega_a = dispersion(ParticleKind::Boson, q, params);
    const double omega_b = dispersion(ParticleKind::Fermion, k, params);
    return fv * fv * chi * chi * h2 * kspec.coupling * kspec.coupling /
           ((omega_b + omega_a) * std::pow(omega_a, 2.0 * kspec.p));
  }
};

// midpoint sum of the v-integral at fixed q
double inner_v_integral(const E2Integrand& ig, const Eigen::Vector3d& q,
                        int res, long& evals) {
  const double h = 2.0 / res;
  const int ny = ig.d >= 2 ? res : 1;
  const int nz = ig.d >= 3 ? res : 1;
  double sum = 0.0;
  for (int ix = 0; ix < res; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int iz = 0; iz < nz; ++iz) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        v[0] = -1.0 + (ix + 0.5) * h;
        if (ig.d >= 2) v[1] = -1.0 + (iy + 0.5) * h;
        if (ig.d >= 3) v[2] = -1.0 + (iz + 0.5) * h;
        if (v.squaredNorm() > 1.0) continue;
        ++evals;
        sum += ig(v, q);
      }
  return sum * std::pow(h, ig.d);
}

double tensor_midpoint_pass(const E2Integrand& ig, double lambda, int res_q,
                            int res_v, long& evals) {
  const double hq = 2.0 * lambda / res_q;
  const int ny = ig.d >= 2 ? res_q : 1;
  const int nz = ig.d >= 3 ? res_q : 1;
  double sum = 0.0;
  for (int ix = 0; ix < res_q; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int iz = 0; iz < nz; ++iz) {
        Eigen::Vector3d q = Eigen::Vector3d::Zero();
        q[0] = -lambda + (ix + 0.5) * hq;
        if (ig.d >= 2) q[1] = -lambda + (iy + 0.5) * hq;
        if (ig.d >= 3) q[2] = -lambda + (iz + 0.5) * hq;
        if (q.norm() > lambda) continue;
        sum += inner_v_integral(ig, q, res_v, evals);
      }
  return sum * std::pow(hq, ig.d);
}

// radial q-integrand (valid for radially symmetric h; q placed on axis 1)
struct RadialIntegrand {
  const E2Integrand& ig;
  int res_v;
  long* evals;

  double operator()(double r) const {
    static const double surf[4] = {0.0, 2.0, 2.0 * M_PI, 4.0 * M_PI};
    Eigen::Vector3d q = Eigen::Vector3d::Zero();
    q[0] = r;
    return surf[ig.d] * std::pow(r, ig.d - 1) *
           inner_v_integral(ig, q, res_v, *evals);
  }
};

struct AdaptiveState {
  double tol;
  long budget;
  long* evals;
  bool out_of_budget = false;
};

double adaptive_simpson(const RadialIntegrand& f, double a, double b, double fa,
                        double fm, double fb, double whole, AdaptiveState& st,
                        int depth, double& err_acc) {
  const double m = 0.5 * (a + b);
  if (*st.evals > st.budget) {
    st.out_of_budget = true;
    err_acc += st.tol;  // unknown remainder charged to the estimate
    return whole;
  }
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * st.tol * (b - a)) {
    err_acc += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, st, depth - 1, err_acc) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, st, depth - 1, err_acc);
}

}  // namespace

QuadResult e2_quadrature(const KernelSpec& kspec, const CutoffSpec& cspec,
                         const DispersionParams& params, int d,
                         const QuadratureSpec& qspec) {
  kspec.validate();
  cspec.validate();
  params.validate();
  qspec.validate();
  if (d < 1 || d > 3) throw std::invalid_argument("e2_quadrature: d must be 1, 2 or 3");

  const E2Integrand ig{kspec, cspec, params, d};
  const double nd = std::pow(static_cast<double>(cspec.n), d);
  QuadResult res;

  switch (qspec.method) {
    case QuadMethod::TensorMidpoint: {
      // two resolutions for a Richardson-style error estimate
      int rq = qspec.resolution;
      const auto projected = [&](int r) {
        return 2.0 * std::pow(static_cast<double>(r), d) *
               std::pow(static_cast<double>(qspec.resolution), d);
      };
      while (rq > 4 && projected(rq) > static_cast<double>(qspec.max_evals)) rq /= 2;
      const double coarse =
          tensor_midpoint_pass(ig, cspec.lambda, rq / 2, qspec.resolution, res.evals);
      const double fine =
          tensor_midpoint_pass(ig, cspec.lambda, rq, qspec.resolution, res.evals);
      res.value = -nd * fine;
      res.error_estimate = nd * std::abs(fine - coarse) / 3.0;
      res.converged = res.error_estimate <= qspec.error_target &&
                      rq >= qspec.resolution;
      break;
    }
    case QuadMethod::AdaptiveRadial: {
      long evals = 0;
      RadialIntegrand rad{ig, qspec.resolution, &evals};
      AdaptiveState st{qspec.error_target / std::max(1.0, cspec.lambda),
                       qspec.max_evals, &evals};
      const double a = 0.0, b = cspec.lambda;
      const double fa = rad(a), fb = rad(b), fm = rad(0.5 * (a + b));
      const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
      double err = 0.0;
      const double integral =
          adaptive_simpson(rad, a, b, fa, fm, fb, whole, st, 40, err);
      res.value = -nd * integral;
      res.error_estimate = nd * err;
      res.evals = evals;
      res.converged = !st.out_of_budget && res.error_estimate <= qspec.error_target;
      break;
    }
    case QuadMethod::MonteCarlo: {
      std::mt19937_64 rng(qspec.seed);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      const long n_samples =
          std::min<long>(qspec.max_evals, 4000000L);
      const double vol_v = std::pow(2.0, d);
      const double vol_q = std::pow(2.0 * cspec.lambda, d);
      double sum = 0.0, sum2 = 0.0;
      for (long s = 0; s < n_samples; ++s) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero(), q = Eigen::Vector3d::Zero();
        for (int c = 0; c < d; ++c) {
          v[c] = unit(rng);
          q[c] = cspec.lambda * unit(rng);
        }
        const double val = ig(v, q);
        sum += val;
        sum2 += val * val;
      }
      const double mean = sum / n_samples;
      const double var = std::max(0.0, sum2 / n_samples - mean * mean);
      res.value = -nd * vol_v * vol_q * mean;
      res.error_estimate =
          nd * vol_v * vol_q * std::sqrt(var / n_samples);
      res.evals = n_samples;
      res.converged = res.error_estimate <= qspec.error_target;
      break;
    }
  }
  return res;
}

namespace {
double grid_weighted_norm(const Eigen::MatrixXcd& f, const ModeGrid& grid,
                          double w, const DispersionParams& params,
                          bool fermion_weight, double denom_exp, double re_z) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    double col = 0.0;
    if (!fermion_weight) {
      const double omega_a =
          dispersion(ParticleKind::Boson, grid.centers[j], params);
      const double weight =
          1.0 / (omega_a * std::pow(omega_a + std::abs(re_z), denom_exp));
      for (Eigen::Index i = 0; i < m; ++i) col += std::norm(f(i, j));
      sum += weight * col;
    } else {
      for (Eigen::Index i = 0; i < m; ++i) {
        const double omega_b =
            dispersion(ParticleKind::Fermion, grid.centers[i], params);
        sum += std::norm(f(i, j)) /
               (omega_b * std::pow(omega_b + std::abs(re_z), denom_exp));
      }
    }
  }
  return std::sqrt(w * w * sum);
}
}  // namespace

double k1_constant(cplx z, double beta, const Eigen::MatrixXcd& f,
                   const ModeGrid& grid, double w, const DispersionParams& params) {
  if (z.real() >= -1.0) throw std::invalid_argument("k1_constant: Re z < -1 required");
  if (beta < 0.5 || beta > 1.0)
    throw std::invalid_argument("k1_constant: beta must be in [1/2, 1]");
  return grid_weighted_norm(f, grid, w, params, true, 2.0 * beta - 1.0, z.real());
}

double k2_constant(cplx z, double beta, const Eigen::MatrixXcd& f,
                   const Eigen::MatrixXcd& g, const ModeGrid& grid, double w,
                   const DispersionParams& params) {
  if (z.real() >= -1.0) throw std::invalid_argument("k2_constant: Re z < -1 required");
  if (beta < 0.0 || beta > 2.0)
    throw std::invalid_argument("k2_constant: beta must be in [0, 2]");
  const double af = grid_weighted_norm(f, grid, w, params, false, beta, z.real());
  const double ag = grid_weighted_norm(g, grid, w, params, false, beta, z.real());
  return af * ag;
}

double k3_constant(cplx z, double gamma, const Eigen::MatrixXcd& f1,
                   const Eigen::MatrixXcd& f2, const Eigen::MatrixXcd& f3,
                   const ModeGrid& grid, double w, const DispersionParams& params) {
  if (z.real() >= -1.0) throw std::invalid_argument("k3_constant: Re z < -1 required");
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("k3_constant: gamma must be in [0, 1]");
  const double e = 1.0 / 3.0 + 2.0 * gamma / 3.0;
  return grid_weighted_norm(f1, grid, w, params, true, e, z.real()) *
         grid_weighted_norm(f2, grid, w, params, true, e, z.real()) *
         grid_weighted_norm(f3, grid, w, params, true, e, z.real());
}

ThresholdReport thresholds(int d, double p) {
  if (d < 1 || d > 3) throw std::invalid_argument("thresholds: d must be 1, 2 or 3");
  if (p < 0.0) throw std::invalid_argument("thresholds: p must be >= 0");
  ThresholdReport rep;
  rep.d = d;
  rep.p = p;
  rep.beta_min_k1 = d / 2.0 - p;
  rep.beta_min_k2 = d - 2.0 * p - 1.0;
  rep.beta_min_k3 = 1.5 * d - 3.0 * p - 2.0;
  // the fixed weights 3/4, 1/2, 1/4 against the three minima; each strict
  // inequality scales (exactly, in powers of two) to 4p > 2d - 3
  const bool c1 = 4.0 * p > 2.0 * d - 3.0;            // 3/4 > d/2 - p
  const bool c2 = 4.0 * p > 2.0 * d - 3.0;            // 1/2 > d - 2p - 1
  const bool c3 = 12.0 * p > 6.0 * d - 9.0;           // 1/4 > 3d/2 - 3p - 2
  rep.scheme_feasible = c1 && c2 && c3;
  return rep;
}

}  // namespace uvlab
