#include "uvlab/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <stdexcept>

namespace uvlab {

namespace {

struct TwoLowest {
  double e0 = 0.0;
  double e1 = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// Two smallest eigenvalues of a Hermitian operator; dense below dim 2048,
/// otherwise Lanczos with full reorthogonalization and an all-ones start.
TwoLowest two_lowest(const SparseOperator& h, double tol, int max_iter = 10000) {
  if (!h.hermitian)
    throw std::invalid_argument("two_lowest: operator must be Hermitian");
  TwoLowest out;
  const auto n = static_cast<Eigen::Index>(h.dim);
  if (n == 0) return out;
  if (n == 1) {
    out.e0 = out.e1 = std::real(h.dense()(0, 0));
    out.iterations = 1;
    return out;
  }
  if (n < 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.dense());
    out.e0 = es.eigenvalues()(0);
    out.e1 = es.eigenvalues()(1);
    out.iterations = 1;
    return out;
  }

  Eigen::VectorXcd start = Eigen::VectorXcd::Ones(n);
  start /= start.norm();
  const int max_krylov = std::min<int>(max_iter, static_cast<int>(std::min<Eigen::Index>(n, 400)));
  std::vector<Eigen::VectorXcd> basis;
  std::vector<double> alpha, beta;
  basis.push_back(start);
  for (int j = 0; j < max_krylov; ++j) {
    Eigen::VectorXcd w = h.mat * basis[j];
    const double a_j = std::real(basis[j].dot(w));
    alpha.push_back(a_j);
    w -= a_j * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    for (const auto& u : basis) w -= u.dot(w) * u;  // full reorthogonalization
    const double b_j = w.norm();
    out.iterations = j + 1;

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(j + 1, j + 1);
    for (int i = 0; i <= j; ++i) tri(i, i) = alpha[i];
    for (int i = 0; i < j; ++i) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    out.e0 = es.eigenvalues()(0);
    out.e1 = (j >= 1) ? es.eigenvalues()(1) : out.e0;

    const double r0 = b_j * std::abs(es.eigenvectors()(j, 0));
    const double r1 = (j >= 1) ? b_j * std::abs(es.eigenvectors()(j, 1)) : r0;
    if (b_j < 1e-14 ||
        (r0 <= tol * std::max(1.0, std::abs(out.e0)) &&
         r1 <= tol * std::max(1.0, std::abs(out.e1)) && j >= 1)) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
      for (int i = 0; i <= j; ++i) v += es.eigenvectors()(i, 0) * basis[i];
      v /= v.norm();
      out.residual = (h.mat * v - out.e0 * v).norm();
      return out;
    }
    beta.push_back(b_j);
    basis.push_back(w / b_j);
  }
  out.converged = false;
  out.residual = tol * 10;
  return out;
}

KernelMatrix scaled_kernel(const KernelMatrix& unit, double coupling) {
  KernelMatrix km = unit;
  km.values1 *= coupling;
  km.values2 *= coupling;
  return km;
}

}  // namespace

GroundResult ground_energy(const SparseOperator& h, double tol) {
  IterResult it = smallest_eigenvalue(h, tol);
  if (!it.converged)
    throw std::runtime_error(
        "ground_energy: eigensolver did not converge within the iteration budget");
  return GroundResult{it.value, it.residual, it.iterations};
}

PerturbationReport perturbation_check(const SpectralConfig& cfg,
                                      std::vector<double> lambda_grid,
                                      double lambda_max) {
  cfg.masses.validate();
  cfg.kernel.validate();
  cfg.cutoff.validate();
  if (lambda_grid.size() < 2)
    throw std::invalid_argument("perturbation_check: need at least two grid points");
  std::sort(lambda_grid.begin(), lambda_grid.end());
  for (double l : lambda_grid)
    if (!(l > 0.0) || l > lambda_max)
      throw std::invalid_argument(
          "perturbation_check: coupling grid must lie in (0, lambda_max]");
  if (lambda_grid.front() == lambda_grid.back())
    throw std::invalid_argument("perturbation_check: grid points must be distinct");

  const ModeGrid grid = build_grid(cfg.d, cfg.q_max, cfg.cells_per_axis);
  const FockBasis basis(static_cast<int>(grid.size()), static_cast<int>(grid.size()),
                        cfg.boson_cap);
  KernelSpec unit_spec = cfg.kernel;
  unit_spec.coupling = 1.0;
  const KernelMatrix km_unit = kernel_matrix(unit_spec, cfg.cutoff, cfg.masses, grid);

  PerturbationReport rep;
  rep.e2 = e2_discrete(km_unit, cfg.masses);
  rep.lambdas = lambda_grid;
  rep.energies.resize(lambda_grid.size());
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const KernelMatrix km = scaled_kernel(km_unit, lambda_grid[i]);
    const HamiltonianParts parts = build_full(grid, cfg.masses, km, basis);
    rep.energies[i] = ground_energy(parts.h_full, cfg.tol).energy;
  }

  // Richardson step on r(lambda) = E/lambda^2 = c2 + c4 lambda^2 + ...,
  // from the two smallest grid points.
  const double x0 = lambda_grid[0] * lambda_grid[0];
  const double x1 = lambda_grid[1] * lambda_grid[1];
  const double r0 = rep.energies[0] / x0;
  const double r1 = rep.energies[1] / x1;
  rep.c2_fit = (x1 * r0 - x0 * r1) / (x1 - x0);
  const double c4 = (r1 - r0) / (x1 - x0);
  const double x_max = lambda_grid.back() * lambda_grid.back();
  rep.fit_unstable = std::abs(c4) * x_max > std::abs(rep.c2_fit);
  rep.relative_mismatch = (rep.e2 == 0.0)
                              ? std::abs(rep.c2_fit)
                              : std::abs(rep.c2_fit - rep.e2) / std::abs(rep.e2);
  return rep;
}

SweepResult renormalized_sweep(const SpectralConfig& cfg,
                               const std::vector<double>& lambda_list) {
  cfg.masses.validate();
  cfg.kernel.validate();
  cfg.cutoff.validate();
  if (lambda_list.empty())
    throw std::invalid_argument("renormalized_sweep: empty cutoff list");
  for (std::size_t i = 0; i + 1 < lambda_list.size(); ++i)
    if (!(lambda_list[i] < lambda_list[i + 1]))
      throw std::invalid_argument(
          "renormalized_sweep: cutoff list must be strictly increasing");
  if (!(lambda_list.front() > 0.0))
    throw std::invalid_argument("renormalized_sweep: cutoffs must be positive");
  if (cfg.q_max < lambda_list.back() * CutoffSpec::r_chi)
    throw std::invalid_argument(
        "renormalized_sweep: grid q_max must cover max cutoff times r_chi");

  const ModeGrid grid = build_grid(cfg.d, cfg.q_max, cfg.cells_per_axis);
  const FockBasis basis(static_cast<int>(grid.size()), static_cast<int>(grid.size()),
                        cfg.boson_cap);

  SweepResult res;
  res.d = cfg.d;
  res.p = cfg.kernel.p;
  res.m_b = cfg.masses.m_b;
  res.m_f = cfg.masses.m_f;
  res.n = cfg.cutoff.n;
  res.q_max = cfg.q_max;
  res.cells_per_axis = cfg.cells_per_axis;
  res.boson_cap = cfg.boson_cap;
  res.coupling = cfg.kernel.coupling;
  res.rows.resize(lambda_list.size());

  std::exception_ptr row_error = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lambda_list.size()); ++i) {
    try {
      CutoffSpec cspec = cfg.cutoff;
      cspec.lambda = lambda_list[static_cast<std::size_t>(i)];
      const KernelMatrix km = kernel_matrix(cfg.kernel, cspec, cfg.masses, grid);
      const HamiltonianParts parts = build_full(grid, cfg.masses, km, basis);
      const TwoLowest tl = two_lowest(parts.h_full, cfg.tol);
      if (!tl.converged)
        throw std::runtime_error("renormalized_sweep: eigensolver did not converge");
      SweepRow row;
      row.lambda_uv = cspec.lambda;
      row.e_lambda = tl.e0;
      row.e2 = e2_discrete(km, cfg.masses);
      row.renormalized = row.e_lambda - row.e2;
      row.c_lambda = c_lambda(km, cfg.masses);
      row.gap = tl.e1 - tl.e0;
      row.residual = tl.residual;
      res.rows[static_cast<std::size_t>(i)] = row;
    } catch (...) {
#pragma omp critical
      if (!row_error) row_error = std::current_exception();
    }
  }
  if (row_error) std::rethrow_exception(row_error);

  for (const SweepRow& row : res.rows)
    if (row.e_lambda < -row.c_lambda - 1e-9) res.bound_violated = true;
  for (std::size_t i = 0; i + 1 < res.rows.size(); ++i)
    res.renorm_deltas.push_back(
        std::abs(res.rows[i + 1].renormalized - res.rows[i].renormalized));
  // stabilization over the last three rows: the final step no larger than
  // the one before it
  if (res.renorm_deltas.size() >= 2) {
    const std::size_t last = res.renorm_deltas.size();
    res.stabilizing = res.renorm_deltas[last - 1] <= res.renorm_deltas[last - 2] + 1e-15;
  }
  return res;
}

double resolvent_distance(const HamiltonianParts& p1, const HamiltonianParts& p2,
                          cplx z, double e2_1, double e2_2, double tol) {
  if (p1.h_full.dim != p2.h_full.dim)
    throw std::invalid_argument("resolvent_distance: operators on different bases");
  if (!(z.real() < 0.0))
    throw std::invalid_argument("resolvent_distance: need Re z < 0");
  const auto n = static_cast<Eigen::Index>(p1.h_full.dim);
  if (n == 0) return 0.0;

  SparseMat id(n, n);
  id.setIdentity();
  auto factor = [&](const SparseOperator& h, double e2, cplx zz) {
    SparseMat a = h.mat - (cplx(e2, 0.0) + zz) * id;
    a.makeCompressed();
    auto solver = std::make_unique<Eigen::SparseLU<SparseMat>>();
    solver->compute(a);
    if (solver->info() != Eigen::Success)
      throw std::runtime_error("resolvent_distance: sparse factorization failed");
    return solver;
  };

  auto lu1 = factor(p1.h_full, e2_1, z);
  auto lu2 = factor(p2.h_full, e2_2, z);
  // H is Hermitian, so the adjoint of (H - e2 - z)^(-1) is the solve at conj z.
  const bool real_z = z.imag() == 0.0;
  std::unique_ptr<Eigen::SparseLU<SparseMat>> lu1a, lu2a;
  if (!real_z) {
    lu1a = factor(p1.h_full, e2_1, std::conj(z));
    lu2a = factor(p2.h_full, e2_2, std::conj(z));
  }

  auto apply = [&](const Eigen::VectorXcd& x) {
    return Eigen::VectorXcd(lu1->solve(x) - lu2->solve(x));
  };
  auto apply_adjoint = [&](const Eigen::VectorXcd& x) {
    if (real_z) return apply(x);
    return Eigen::VectorXcd(lu1a->solve(x) - lu2a->solve(x));
  };
  IterResult res =
      implicit_operator_norm(p1.h_full.dim, apply, apply_adjoint, tol);
  if (!res.converged)
    throw std::runtime_error("resolvent_distance: power iteration did not converge");
  return res.value;
}

cplx default_probe(double c_max) {
  return cplx(-2.0 * (1.0 + 25.0 * c_max * c_max), 0.0);
}

}  // namespace uvlab
