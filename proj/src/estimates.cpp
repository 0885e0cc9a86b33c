#include "uvlab/estimates.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "uvlab/counterterm.hpp"
#include "uvlab/linalg.hpp"

namespace uvlab {

namespace {

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

void require_deep(cplx z) {
  if (!(z.real() < -1.0))
    throw std::invalid_argument("audit: Re z < -1 is required");
}

/// Diagonal (E_s + shift - z)^alpha; well defined since Re(E + shift - z) > 0.
SparseOperator shifted_positive_power(const Eigen::VectorXd& h0_diag, cplx z,
                                      double alpha, double shift) {
  const auto dim = h0_diag.size();
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim);
  for (Eigen::Index s = 0; s < dim; ++s)
    trips.emplace_back(static_cast<int>(s), static_cast<int>(s),
                       std::pow(cplx(h0_diag(s) + shift, 0.0) - z, alpha));
  SparseMat mat(dim, dim);
  mat.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(static_cast<std::size_t>(dim), std::move(mat),
                        z.imag() == 0.0);
}

SparseOperator kernel_block(BlockTag tag, const Eigen::MatrixXcd& f,
                            const AuditContext& ctx) {
  KernelMatrix km;
  km.values1 = f;
  km.values2 = f;
  km.w = ctx.w;
  km.grid = ctx.grid;
  return build_block(tag, km, *ctx.basis);
}

}  // namespace

AuditContext make_audit_context(const ModeGrid& grid, const FockBasis& basis,
                                const DispersionParams& params) {
  AuditContext ctx;
  ctx.grid = &grid;
  ctx.basis = &basis;
  ctx.params = params;
  ctx.w = grid.w;
  auto h0 = build_free(grid, params, basis);
  ctx.h0_diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dim()));
  for (int k = 0; k < h0.mat.outerSize(); ++k)
    for (SparseMat::InnerIterator it(h0.mat, k); it; ++it)
      ctx.h0_diag(it.row()) = it.value().real();
  return ctx;
}

SparseOperator smeared_fermion(const Eigen::VectorXcd& f, const AuditContext& ctx) {
  const int m = ctx.basis->fermion_modes();
  if (f.size() != m)
    throw std::invalid_argument("smeared_fermion: length must match the modes");
  SparseOperator op = SparseOperator::zero(ctx.basis->dim());
  const double sw = std::sqrt(ctx.w);
  for (int i = 0; i < m; ++i) {
    if (f(i) == cplx(0.0, 0.0)) continue;
    op = op + (sw * f(i)) * fermion_op(i, OpKind::Annihilate, *ctx.basis);
  }
  return op;
}

double smeared_norm(const Eigen::VectorXcd& f, double w) {
  return std::sqrt(w * f.squaredNorm());
}

AuditReport audit_fermion_bound(const Eigen::VectorXcd& f, cplx z, double c,
                                double cprime, double alpha,
                                const AuditContext& ctx) {
  require_deep(z);
  if (!(cprime >= c && c >= 0.0))
    throw std::invalid_argument("audit_fermion_bound: need C' >= C >= 0");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("audit_fermion_bound: alpha must be in [0, 1]");

  AuditReport rep;
  rep.lemma_id = "fermion_smearing_bound";
  rep.bound_constant = 2.0;
  rep.samples = 2;

  const double base = smeared_norm(f, ctx.w);
  if (base > 0.0) {
    auto bf = smeared_fermion(f, ctx);
    auto left = shifted_positive_power(ctx.h0_diag, z, alpha, c);
    auto right = free_resolvent_power(ctx.h0_diag, z, alpha, cprime);
    const double n1 = operator_norm(left * bf * right);
    const double n2 = operator_norm(right * bf.adjoint() * left);
    rep.max_ratio = std::max(n1, n2) / base;
    rep.worst_config = fmt("%s ordering, z=(%g,%g) alpha=%g C=%g C'=%g",
                           n1 >= n2 ? "annihilator" : "creator", z.real(),
                           z.imag(), alpha, c, cprime);
  }
  rep.finalize();
  return rep;
}

std::vector<AuditReport> audit_asharp(const Eigen::VectorXcd& f, cplx z,
                                      double delta, double gamma, double c,
                                      double cprime, const AuditContext& ctx,
                                      int psi_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(ctx.basis->dim());
  std::vector<Eigen::VectorXcd> psis;
  for (int s = 0; s < psi_samples; ++s) {
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index t = 0; t < dim; ++t) psi(t) = cplx(gauss(rng), gauss(rng));
    psis.push_back(std::move(psi));
  }
  return audit_asharp(f, z, delta, gamma, c, cprime, ctx, psis);
}

std::vector<AuditReport> audit_asharp(const Eigen::VectorXcd& f, cplx z,
                                      double delta, double gamma, double c,
                                      double cprime, const AuditContext& ctx,
                                      const std::vector<Eigen::VectorXcd>& psis) {
  require_deep(z);
  if (delta < 0.0 || gamma < 0.0 || delta + gamma < 0.5 - 1e-15 ||
      delta + gamma > 1.0 + 1e-15)
    throw std::invalid_argument(
        "audit_asharp: need delta, gamma >= 0 and 1/2 <= delta+gamma <= 1");
  if (!(cprime >= c && c >= 0.0))
    throw std::invalid_argument("audit_asharp: need C' >= C >= 0");

  const auto& basis = *ctx.basis;
  const auto& grid = *ctx.grid;
  const int m = basis.boson_modes();
  const auto dim = static_cast<Eigen::Index>(basis.dim());
  const double abs_re = std::abs(z.real());
  const double sum_exp = 2.0 * (delta + gamma) - 1.0;

  auto bf = smeared_fermion(f, ctx);
  auto bf_dag = bf.adjoint();
  const double f_norm2 = ctx.w * f.squaredNorm();
  auto r_gamma = free_resolvent_power(ctx.h0_diag, z, gamma, cprime);

  std::vector<SparseOperator> a_ops, b_ops;
  std::vector<double> omega_a(m), omega_b(m);
  for (int j = 0; j < m; ++j) {
    a_ops.push_back(boson_op(j, OpKind::Annihilate, basis));
    b_ops.push_back(fermion_op(j, OpKind::Annihilate, basis));
    omega_a[j] = dispersion(ParticleKind::Boson, grid.centers[j], ctx.params);
    omega_b[j] = dispersion(ParticleKind::Fermion, grid.centers[j], ctx.params);
  }

  AuditReport pair;
  pair.lemma_id = "mode_sum_pair";
  pair.bound_constant = 4.0;
  AuditReport single;
  single.lemma_id = "mode_sum_single";
  single.bound_constant = 1.0;

  for (std::size_t rep_i = 0; rep_i < psis.size(); ++rep_i) {
    const Eigen::VectorXcd& psi = psis[rep_i];
    if (psi.size() != dim)
      throw std::invalid_argument("audit_asharp: probe state dimension mismatch");
    const double psi_norm2 = psi.squaredNorm();
    const Eigen::VectorXcd base = r_gamma.mat * psi;
    const Eigen::VectorXcd smeared = bf.mat * base;

    double lhs_pair[4] = {0.0, 0.0, 0.0, 0.0};
    double lhs_single[2] = {0.0, 0.0};
    for (int j = 0; j < m; ++j) {
      const double fac_a = omega_a[j] * std::pow(omega_a[j] + abs_re, sum_exp);
      const double fac_b = omega_b[j] * std::pow(omega_b[j] + abs_re, sum_exp);
      auto d_a = free_resolvent_power(ctx.h0_diag, z, delta, omega_a[j] + c);
      auto d_b = free_resolvent_power(ctx.h0_diag, z, delta, omega_b[j] + c);
      lhs_pair[0] += fac_a * (d_a.mat * (a_ops[j].mat * smeared)).squaredNorm();
      lhs_pair[1] +=
          fac_a * (d_a.mat * (bf_dag.mat * (a_ops[j].mat * base))).squaredNorm();
      lhs_pair[2] += fac_b * (d_b.mat * (b_ops[j].mat * smeared)).squaredNorm();
      lhs_pair[3] +=
          fac_b * (d_b.mat * (bf_dag.mat * (b_ops[j].mat * base))).squaredNorm();
      lhs_single[0] += fac_a * (d_a.mat * (a_ops[j].mat * base)).squaredNorm();
      lhs_single[1] += fac_b * (d_b.mat * (b_ops[j].mat * base)).squaredNorm();
    }

    static const char* pair_names[4] = {"boson then smeared",
                                        "boson then smeared-creator",
                                        "fermion then smeared",
                                        "fermion then smeared-creator"};
    for (int v = 0; v < 4; ++v) {
      pair.samples += 1;
      const double denom = f_norm2 * psi_norm2;
      const double ratio = denom > 0.0 ? lhs_pair[v] / denom : 0.0;
      if (ratio > pair.max_ratio) {
        pair.max_ratio = ratio;
        pair.worst_config = fmt("%s, sample %d, z=(%g,%g) delta=%g gamma=%g",
                                pair_names[v], static_cast<int>(rep_i), z.real(),
                                z.imag(), delta, gamma);
      }
    }
    static const char* single_names[2] = {"boson mode", "fermion mode"};
    for (int v = 0; v < 2; ++v) {
      single.samples += 1;
      const double ratio = psi_norm2 > 0.0 ? lhs_single[v] / psi_norm2 : 0.0;
      if (ratio > single.max_ratio) {
        single.max_ratio = ratio;
        single.worst_config = fmt("%s, sample %d, z=(%g,%g) delta=%g gamma=%g",
                                  single_names[v], static_cast<int>(rep_i),
                                  z.real(), z.imag(), delta, gamma);
      }
    }
  }
  pair.finalize();
  single.finalize();
  return {pair, single};
}

AuditReport audit_reg_term_alone(const Eigen::MatrixXcd& f, cplx z, double delta,
                                 double gamma, double c, double cprime,
                                 const AuditContext& ctx) {
  require_deep(z);
  if (delta < 0.0 || delta > 1.0 || gamma < 0.0 || gamma > 1.0 ||
      delta + gamma < 0.5 - 1e-15)
    throw std::invalid_argument(
        "audit_reg_term_alone: need delta, gamma in [0,1], delta+gamma >= 1/2");
  if (!(cprime >= c && c >= 0.0))
    throw std::invalid_argument("audit_reg_term_alone: need C' >= C >= 0");

  const auto& grid = *ctx.grid;
  const int m = ctx.basis->fermion_modes();
  if (f.rows() != m || f.cols() != ctx.basis->boson_modes())
    throw std::invalid_argument("audit_reg_term_alone: kernel shape mismatch");
  const double abs_re = std::abs(z.real());
  const double sum_exp = 2.0 * (delta + gamma) - 1.0;

  AuditReport rep;
  rep.lemma_id = "column_smearing_bound";
  rep.bound_constant = 1.0;
  rep.samples = static_cast<int>(f.cols());

  auto r_gamma = free_resolvent_power(ctx.h0_diag, z, gamma, cprime);
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    const Eigen::VectorXcd col = f.col(j);
    if (col.squaredNorm() == 0.0) continue;
    const double omega_a =
        dispersion(ParticleKind::Boson, grid.centers[j], ctx.params);
    auto d_delta = free_resolvent_power(ctx.h0_diag, z, delta, omega_a + c);
    const double lhs = operator_norm(d_delta * smeared_fermion(col, ctx) * r_gamma);

    double term1 = 0.0, term2 = 0.0;
    for (int i = 0; i < m; ++i) {
      const double f2 = ctx.w * std::norm(f(i, j));
      if (f2 == 0.0) continue;
      const double omega_b =
          dispersion(ParticleKind::Fermion, grid.centers[i], ctx.params);
      term1 += f2 / (omega_b * std::pow(omega_b + abs_re, sum_exp));
      term2 += f2 / (std::pow(omega_a + abs_re, 2.0 * delta) *
                     std::pow(omega_a + omega_b + abs_re, 2.0 * gamma));
    }
    const double rhs = std::sqrt(term1) + std::sqrt(term2);
    const double ratio = lhs / rhs;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_config = fmt("column %ld, z=(%g,%g) delta=%g gamma=%g C=%g C'=%g",
                             static_cast<long>(j), z.real(), z.imag(), delta,
                             gamma, c, cprime);
    }
  }
  rep.finalize();
  return rep;
}

AuditReport audit_power_shift(const Eigen::MatrixXcd& f,
                              const std::vector<double>& lambda_grid,
                              const std::array<double, 4>& expo,
                              const std::array<double, 4>& expo_primed,
                              const ModeGrid& grid, double w,
                              const DispersionParams& params, double ceiling) {
  for (double e : expo)
    if (e < 0.0) throw std::invalid_argument("audit_power_shift: exponents >= 0");
  for (double e : expo_primed)
    if (e < 0.0) throw std::invalid_argument("audit_power_shift: exponents >= 0");
  if (std::abs(expo[0] + expo[2] - expo_primed[0] - expo_primed[2]) > 1e-12 ||
      std::abs(expo[1] + expo[3] - expo_primed[1] - expo_primed[3]) > 1e-12)
    throw std::invalid_argument(
        "audit_power_shift: exponent sums must balance between the quadruples");

  const auto m = static_cast<Eigen::Index>(grid.size());
  if (f.rows() != m || f.cols() != m)
    throw std::invalid_argument("audit_power_shift: kernel shape mismatch");

  AuditReport rep;
  rep.lemma_id = "power_shift";
  rep.bound_constant = ceiling;
  rep.samples = static_cast<int>(lambda_grid.size());

  const auto weighted_sum = [&](double lambda, const std::array<double, 4>& e) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double oa = dispersion(ParticleKind::Boson, grid.centers[j], params);
      const double da =
          std::pow(oa, e[0]) * std::pow(oa + lambda, e[1]);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double f2 = std::norm(f(i, j));
        if (f2 == 0.0) continue;
        const double ob =
            dispersion(ParticleKind::Fermion, grid.centers[i], params);
        sum += w * w * f2 /
               (da * std::pow(ob, e[2]) * std::pow(ob + lambda, e[3]));
      }
    }
    return sum;
  };

  for (double lambda : lambda_grid) {
    if (lambda < 0.0)
      throw std::invalid_argument("audit_power_shift: lambda must be >= 0");
    const double denom = weighted_sum(lambda, expo_primed);
    const double ratio = denom > 0.0 ? weighted_sum(lambda, expo) / denom : 0.0;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_config = fmt("lambda=%g", lambda);
    }
  }
  rep.finalize();
  return rep;
}

AuditReport audit_block_bounds(BlockCombo combo,
                               const std::vector<Eigen::MatrixXcd>& kernels,
                               cplx z, const std::vector<double>& exponents,
                               const AuditContext& ctx, double ceiling) {
  require_deep(z);
  const auto& grid = *ctx.grid;
  const auto rpow = [&](double alpha) {
    return free_resolvent_power(ctx.h0_diag, z, alpha);
  };
  const auto blk = [&](BlockTag tag, const Eigen::MatrixXcd& f) {
    return kernel_block(tag, f, ctx);
  };

  AuditReport rep;
  double measured = 0.0, base = 0.0;
  const char* side = "";

  switch (combo) {
    case BlockCombo::LoweringSingle: {
      if (kernels.size() != 1 || exponents.size() != 1)
        throw std::invalid_argument("audit_block_bounds: single combo wants 1+1");
      const double beta = exponents[0];
      if (beta < 0.5 - 1e-15 || beta > 1.0 + 1e-15)
        throw std::invalid_argument("audit_block_bounds: beta must be in [1/2, 1]");
      const auto& f = kernels[0];
      auto rb = rpow(beta);
      const double n[4] = {operator_norm(blk(BlockTag::ab, f) * rb),
                           operator_norm(rb * blk(BlockTag::astbst, f)),
                           operator_norm(blk(BlockTag::abst, f) * rb),
                           operator_norm(rb * blk(BlockTag::astb, f))};
      static const char* names[4] = {"pair annihilator", "pair creator",
                                     "boson annihilator", "boson creator"};
      int best = 0;
      for (int v = 1; v < 4; ++v)
        if (n[v] > n[best]) best = v;
      measured = n[best];
      side = names[best];
      base = k1_constant(z, beta, f, grid, ctx.w, ctx.params);
      rep.lemma_id = "block_single";
      rep.bound_constant = 1.0;
      rep.samples = 4;
      break;
    }
    case BlockCombo::PairCompensated: {
      if (kernels.size() != 2 || exponents.size() != 2)
        throw std::invalid_argument("audit_block_bounds: pair combo wants 2+2");
      const double gamma = exponents[0], delta = exponents[1];
      if (gamma < 0.0 || gamma > 1.0 || delta < 0.0 || delta > 1.0)
        throw std::invalid_argument(
            "audit_block_bounds: gamma, delta must be in [0, 1]");
      const auto& f = kernels[0];
      const auto& g = kernels[1];
      const double e = e_pair_discrete(f, g, grid, ctx.w, ctx.params);
      auto inner = blk(BlockTag::ab, f) * rpow(1.0) * blk(BlockTag::astbst, g) +
                   cplx(e, 0.0) * SparseOperator::identity(ctx.basis->dim());
      measured = operator_norm(rpow(gamma) * inner * rpow(delta));
      base = k2_constant(z, gamma + delta, f, g, grid, ctx.w, ctx.params);
      side = "compensated product";
      rep.lemma_id = "block_pair_compensated";
      rep.bound_constant = ceiling;
      rep.samples = 1;
      break;
    }
    case BlockCombo::PairSameSide: {
      if (kernels.size() != 2 || exponents.size() != 1)
        throw std::invalid_argument("audit_block_bounds: same-side wants 2+1");
      const double beta = exponents[0];
      if (beta < 0.0 || beta > 1.0)
        throw std::invalid_argument("audit_block_bounds: beta must be in [0, 1]");
      const auto& f = kernels[0];
      const auto& g = kernels[1];
      const double n1 = operator_norm(blk(BlockTag::ab, f) * rpow(1.0) *
                                      blk(BlockTag::astb, g) * rpow(beta));
      const double n2 = operator_norm(rpow(beta) * blk(BlockTag::abst, g) *
                                      rpow(1.0) * blk(BlockTag::astbst, f));
      measured = std::max(n1, n2);
      side = n1 >= n2 ? "lowering form" : "raising form";
      base = k2_constant(z, beta, f, g, grid, ctx.w, ctx.params);
      rep.lemma_id = "block_pair_same_side";
      rep.bound_constant = ceiling;
      rep.samples = 2;
      break;
    }
    case BlockCombo::PairExchange: {
      if (kernels.size() != 2 || exponents.size() != 2)
        throw std::invalid_argument("audit_block_bounds: exchange wants 2+2");
      const double delta = exponents[0], gamma = exponents[1];
      if (gamma < 0.0 || gamma > 1.0 || delta < 0.0 || delta > 1.0)
        throw std::invalid_argument(
            "audit_block_bounds: gamma, delta must be in [0, 1]");
      const auto& f = kernels[0];
      const auto& g = kernels[1];
      measured = operator_norm(rpow(delta) * blk(BlockTag::abst, f) * rpow(1.0) *
                               blk(BlockTag::astb, g) * rpow(gamma));
      base = k2_constant(z, gamma + delta, f, g, grid, ctx.w, ctx.params);
      side = "exchange product";
      rep.lemma_id = "block_pair_exchange";
      rep.bound_constant = ceiling;
      rep.samples = 1;
      break;
    }
    case BlockCombo::TripleToLower:
    case BlockCombo::TripleToRaise: {
      if (kernels.size() != 3 || exponents.size() != 1)
        throw std::invalid_argument("audit_block_bounds: triple wants 3+1");
      const double gamma = exponents[0];
      if (gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("audit_block_bounds: gamma must be in [0, 1]");
      const auto& f1 = kernels[0];
      const auto& f2 = kernels[1];
      const auto& f3 = kernels[2];
      double n1, n2;
      if (combo == BlockCombo::TripleToLower) {
        n1 = operator_norm(blk(BlockTag::ab, f1) * rpow(1.0) *
                           blk(BlockTag::abst, f2) * rpow(1.0) *
                           blk(BlockTag::astbst, f3) * rpow(gamma));
        n2 = operator_norm(rpow(gamma) * blk(BlockTag::ab, f3) * rpow(1.0) *
                           blk(BlockTag::astb, f2) * rpow(1.0) *
                           blk(BlockTag::astbst, f1));
        rep.lemma_id = "block_triple_lower";
      } else {
        n1 = operator_norm(blk(BlockTag::abst, f1) * rpow(1.0) *
                           blk(BlockTag::abst, f2) * rpow(1.0) *
                           blk(BlockTag::astbst, f3) * rpow(gamma));
        n2 = operator_norm(rpow(gamma) * blk(BlockTag::ab, f3) * rpow(1.0) *
                           blk(BlockTag::astb, f2) * rpow(1.0) *
                           blk(BlockTag::astb, f1));
        rep.lemma_id = "block_triple_raise";
      }
      measured = std::max(n1, n2);
      side = n1 >= n2 ? "direct form" : "mirror form";
      base = k3_constant(z, gamma, f1, f2, f3, grid, ctx.w, ctx.params);
      rep.bound_constant = ceiling;
      rep.samples = 2;
      break;
    }
  }

  rep.max_ratio = base > 0.0 ? measured / base : 0.0;
  rep.worst_config = fmt("%s, z=(%g,%g)", side, z.real(), z.imag());
  rep.finalize();
  return rep;
}

double audit_e_fg(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& g,
                  const ModeGrid& grid, double w, const DispersionParams& params) {
  return e_pair_discrete(f, g, grid, w, params);
}

namespace {

void merge(std::vector<AuditReport>& all, const AuditReport& rep, int config_id) {
  for (auto& a : all) {
    if (a.lemma_id != rep.lemma_id) continue;
    a.samples += rep.samples;
    if (rep.max_ratio > a.max_ratio) {
      a.max_ratio = rep.max_ratio;
      a.worst_config = fmt("config %d: %s", config_id, rep.worst_config.c_str());
    }
    return;
  }
  AuditReport first = rep;
  first.worst_config = fmt("config %d: %s", config_id, rep.worst_config.c_str());
  all.push_back(std::move(first));
}

}  // namespace

std::vector<AuditReport> run_audit_suite(const AuditSuiteConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto disk = [&]() {
    const double r = std::sqrt(u01(rng));
    const double phi = 2.0 * M_PI * u01(rng);
    return cplx(r * std::cos(phi), r * std::sin(phi));
  };

  ModeGrid grid = build_grid(1, cfg.q_max, cfg.cells);
  FockBasis basis(cfg.cells, cfg.cells, cfg.boson_cap);
  const auto m = static_cast<Eigen::Index>(grid.size());
  const std::vector<double> lambda_grid = {0.0, 0.1, 1.0, 10.0, 100.0, 1000.0};

  std::vector<AuditReport> all;
  for (int config = 0; config < cfg.configs; ++config) {
    DispersionParams params;
    params.m_b = 0.6 + 1.4 * u01(rng);
    params.m_f = 0.6 + 1.4 * u01(rng);
    auto ctx = make_audit_context(grid, basis, params);

    const cplx z(-2.0 - 48.0 * u01(rng), 0.0);
    Eigen::VectorXcd fvec(m);
    for (Eigen::Index i = 0; i < m; ++i) fvec(i) = disk();
    Eigen::MatrixXcd f(m, m), g(m, m), h(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < m; ++i) {
        f(i, j) = disk();
        g(i, j) = disk();
        h(i, j) = disk();
      }

    const double c = 3.0 * u01(rng);
    const double cprime = c + 3.0 * u01(rng);

    merge(all, audit_fermion_bound(fvec, z, c, cprime, u01(rng), ctx), config);

    {
      const double s = 0.5 + 0.5 * u01(rng);  // delta + gamma in [1/2, 1]
      const double delta = s * u01(rng);
      for (const auto& rep : audit_asharp(fvec, z, delta, s - delta, c, cprime,
                                          ctx, 4, cfg.seed ^ (config + 1)))
        merge(all, rep, config);
    }

    {
      double delta = u01(rng), gamma = u01(rng);
      if (delta + gamma < 0.5) delta = 0.5 - gamma;
      merge(all, audit_reg_term_alone(f, z, delta, gamma, c, cprime, ctx), config);
    }

    {
      std::array<double, 4> e{2.0 * u01(rng), 2.0 * u01(rng), 2.0 * u01(rng),
                              2.0 * u01(rng)};
      // shift some decay between the two frequencies, keeping the sums fixed
      const double t1 = std::min(e[0], e[2]) * u01(rng);
      const double t2 = std::min(e[1], e[3]) * u01(rng);
      std::array<double, 4> ep{e[0] - t1, e[1] + t2, e[2] + t1, e[3] - t2};
      merge(all,
            audit_power_shift(f, lambda_grid, e, ep, grid, grid.w, params,
                              cfg.ceiling),
            config);
    }

    merge(all,
          audit_block_bounds(BlockCombo::LoweringSingle, {f}, z,
                             {0.5 + 0.5 * u01(rng)}, ctx, cfg.ceiling),
          config);
    merge(all,
          audit_block_bounds(BlockCombo::PairCompensated, {f, g}, z,
                             {u01(rng), u01(rng)}, ctx, cfg.ceiling),
          config);
    merge(all,
          audit_block_bounds(BlockCombo::PairSameSide, {f, g}, z, {u01(rng)},
                             ctx, cfg.ceiling),
          config);
    merge(all,
          audit_block_bounds(BlockCombo::PairExchange, {f, g}, z,
                             {u01(rng), u01(rng)}, ctx, cfg.ceiling),
          config);
    merge(all,
          audit_block_bounds(BlockCombo::TripleToLower, {f, g, h}, z,
                             {u01(rng)}, ctx, cfg.ceiling),
          config);
    merge(all,
          audit_block_bounds(BlockCombo::TripleToRaise, {f, g, h}, z,
                             {u01(rng)}, ctx, cfg.ceiling),
          config);
  }

  for (auto& rep : all) rep.finalize();
  return all;
}

}  // namespace uvlab
