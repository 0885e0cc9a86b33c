// Acceptance gate: one check per release criterion, one PASS/FAIL line each.
// The process exits nonzero if any criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uvlab/estimates.hpp"
#include "uvlab/neumann.hpp"
#include "uvlab/spectra.hpp"

using namespace uvlab;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, ...) {
  va_list args;
  va_start(args, f);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// shared model builders

struct BuiltModel {
  ModeGrid grid;
  DispersionParams dp;
  KernelMatrix km;
  FockBasis basis;
  HamiltonianParts parts;
  double e2 = 0.0, cl = 0.0;

  BuiltModel(int d, double q_max, int cells, int cap, DispersionParams dp_in,
             const KernelSpec& ks, const CutoffSpec& cs)
      : grid(build_grid(d, q_max, cells)),
        dp(dp_in),
        km(kernel_matrix(ks, cs, dp, grid)),
        basis(static_cast<int>(grid.size()), static_cast<int>(grid.size()), cap),
        parts(build_full(grid, dp, km, basis)),
        e2(e2_discrete(km, dp)),
        cl(c_lambda(km, dp)) {}
};

KernelSpec pair_only(double coupling) {
  KernelSpec ks;
  ks.p = 0.5;
  ks.h1 = [](const Eigen::Vector3d&, const Eigen::Vector3d&) { return cplx(0.0, 0.0); };
  ks.h1_sup = 0.0;
  ks.coupling = coupling;
  return ks;
}

// ---------------------------------------------------------------------------
// criteria

Outcome c1_algebra() {
  Outcome out;
  struct Spec { int ma, mf, cap; };
  for (const Spec s : {Spec{2, 2, 2}, Spec{4, 4, 3}, Spec{5, 5, 5}}) {
    const FockBasis basis(s.ma, s.mf, s.cap);
    const AlgebraReport rep = algebra_report(basis);
    out.require(rep.pass(1e-12),
                fmt("violations at dim %zu: car %.2e ccr %.2e mixed %.2e",
                    basis.dim(), rep.max_car_violation, rep.max_ccr_violation,
                    rep.max_mixed_violation));
  }
  out.detail = out.detail.empty() ? "bases up to dim 8064 exact" : out.detail;
  return out;
}

Outcome c2_lower_bound() {
  Outcome out;
  std::mt19937_64 rng(0xACCE97u);
  auto uni = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
  int checked = 0;
  double worst_margin = 1e300;
  for (int i = 0; i < 50; ++i) {
    const int d = (i % 2) + 1;
    const int cells = d == 1 ? 2 + static_cast<int>(uni() * 3.0) : 2;
    const int cap = 1 + static_cast<int>(uni() * 2.0);
    DispersionParams dp{0.5 + 1.5 * uni(), 0.5 + 1.5 * uni()};
    KernelSpec ks;
    ks.p = uni();
    ks.coupling = 0.2 + 2.0 * uni();
    CutoffSpec cs;
    const double q_max = 1.0 + 2.0 * uni();
    cs.lambda = q_max * (0.4 + 0.6 * uni());
    cs.chi_shape = uni() < 0.5 ? ChiShape::Indicator : ChiShape::SmoothBump;
    cs.f_shape = uni() < 0.5 ? FShape::BallIndicator : FShape::NormalizedBump;
    const BuiltModel m(d, q_max, cells, cap, dp, ks, cs);
    if (m.basis.dim() > 2000) continue;
    const double e = ground_energy(m.parts.h_full).energy;
    worst_margin = std::min(worst_margin, e + m.cl);
    out.require(e >= -m.cl - 1e-9,
                fmt("config %d: E = %.6g below -C = %.6g", i, e, -m.cl));
    ++checked;
  }
  out.require(checked >= 50, fmt("only %d configs checked", checked));
  if (out.pass) out.detail = fmt("%d configs, smallest margin E + C = %.3g", checked, worst_margin);
  return out;
}

Outcome c3_second_order() {
  Outcome out;
  // closed-form two-level model
  {
    const ModeGrid grid = build_grid(1, 0.5, 1);
    const DispersionParams dp{1.0, 1.5};
    CutoffSpec cs;
    cs.lambda = 4.0;
    const double coupling = 0.8;
    const BuiltModel m(1, 0.5, 1, 2, dp, pair_only(coupling), cs);
    const double g = std::abs(m.km.values2(0, 0)) / coupling;
    const double om = dispersion(ParticleKind::Boson, grid.centers[0], dp) +
                      dispersion(ParticleKind::Fermion, grid.centers[0], dp);
    const double s = m.grid.w * g * coupling;
    const double closed = om / 2.0 - std::sqrt(om * om / 4.0 + s * s);
    const double e = ground_energy(m.parts.h_full, 1e-12).energy;
    out.require(std::abs(e - closed) < 1e-10,
                fmt("two-level mismatch %.3g", std::abs(e - closed)));
  }
  // multi-mode Richardson fit against the discrete shift
  {
    SpectralConfig cfg;
    cfg.masses = {1.0, 1.2};
    cfg.kernel.p = 0.5;
    cfg.cutoff.lambda = 4.0;
    cfg.q_max = 1.5;
    cfg.cells_per_axis = 2;
    cfg.boson_cap = 2;
    const PerturbationReport rep =
        perturbation_check(cfg, {0.0125, 0.025, 0.0375, 0.05});
    out.require(rep.relative_mismatch < 1e-2,
                fmt("fit mismatch %.3g", rep.relative_mismatch));
    if (out.pass)
      out.detail = fmt("fit mismatch %.2e", rep.relative_mismatch);
  }
  return out;
}

Outcome c4_divergence_frontier() {
  Outcome out;
  const DispersionParams dp;
  KernelSpec ks;
  ks.p = 0.5;
  const std::vector<double> lambdas{10, 30, 100, 300, 1000};
  const auto values_for = [&](int d, int res, double target) {
    std::vector<double> vals;
    for (double lam : lambdas) {
      CutoffSpec cs;
      cs.lambda = lam;
      QuadratureSpec qs;
      qs.resolution = res;
      qs.error_target = target;
      qs.max_evals = 200000000;
      vals.push_back(e2_quadrature(ks, cs, dp, d, qs).value);
    }
    return vals;
  };
  const auto log_fit_r2 = [&](const std::vector<double>& vals) {
    const std::size_t n = vals.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::log(lambdas[i]);
      sx += x;
      sy += vals[i];
      sxx += x * x;
      sxy += x * vals[i];
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double a = (sy - b * sx) / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fit = a + b * std::log(lambdas[i]);
      ss_res += (vals[i] - fit) * (vals[i] - fit);
      ss_tot += (vals[i] - sy / n) * (vals[i] - sy / n);
    }
    return 1.0 - ss_res / ss_tot;
  };

  // (a) converging cutoff differences in dimensions one and two
  for (int d : {1, 2}) {
    const std::vector<double> v =
        values_for(d, d == 1 ? 256 : 48, d == 1 ? 1e-6 : 1e-3);
    bool converging = true;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
      converging = converging && std::abs(v[i + 1] - v[i]) < std::abs(v[i] - v[i - 1]);
    out.require(converging, fmt("d=%d differences not converging "
                                "(last %.3g vs prev %.3g)",
                                d, std::abs(v[4] - v[3]), std::abs(v[3] - v[2])));
  }
  // (b) log-growth fit quality in dimension three
  {
    const std::vector<double> v = values_for(3, 16, 1e-3);
    const double r2 = log_fit_r2(v);
    out.require(r2 > 0.99, fmt("d=3 log fit R^2 = %.3f", r2));
  }
  return out;
}

Outcome c5_thresholds() {
  Outcome out;
  int points = 0;
  for (int d = 1; d <= 3; ++d) {
    for (int i = 0; i < 100; ++i) {
      const double p = i / 40.0;  // 0 to 2.475
      const bool expected = 4.0 * p > 2.0 * d - 3.0;
      const ThresholdReport tr = thresholds(d, p);
      out.require(tr.scheme_feasible == expected,
                  fmt("d=%d p=%.4f: feasible=%d expected=%d", d, p,
                      (int)tr.scheme_feasible, (int)expected));
      ++points;
    }
  }
  if (out.pass) out.detail = fmt("%d grid points", points);
  return out;
}

// brute-force enumeration oracle: generate every block-set word of the target
// weight, filter by the adjacency and exponent constraints afterwards, and
// count variant choices.
std::size_t brute_force_count(int k, const GSetCatalog& cat, AdjacencyRule rule) {
  std::size_t count = 0;
  std::vector<int> word;
  const std::function<void(int)> recurse = [&](int weight) {
    if (weight == k) {
      for (std::size_t i = 0; i + 1 < word.size(); ++i)
        if (!adjacency_allowed(word[i], word[i + 1], rule) ||
            !exponents_compatible(cat, word[i], word[i + 1]))
          return;
      std::size_t prod = 1;
      for (int j : word) prod *= cat.set(j).variants.size();
      count += prod;
      return;
    }
    for (int j = 1; j <= 7; ++j) {
      if (weight + cat.n_op(j) > k) continue;
      word.push_back(j);
      recurse(weight + cat.n_op(j));
      word.pop_back();
    }
  };
  recurse(0);
  return count;
}

Outcome c6_series() {
  Outcome out;
  const GSetCatalog cat = catalog();

  struct Cfg { int cells; double q_max; DispersionParams dp; KernelSpec ks; };
  const std::vector<Cfg> cfgs = {
      {1, 0.5, {1.0, 1.5}, pair_only(0.8)},
      {2, 1.5, {1.0, 1.2}, [] { KernelSpec k; k.p = 0.5; return k; }()}};
  for (const Cfg& c : cfgs) {
    CutoffSpec cs;
    cs.lambda = 4.0;
    const BuiltModel m(1, c.q_max, c.cells, 2, c.dp, c.ks, cs);
    const cplx z = default_probe(m.cl);
    const auto n = static_cast<Eigen::Index>(m.basis.dim());
    const Eigen::MatrixXcd reference =
        (m.parts.h_full.dense() -
         (z + cplx(m.e2, 0.0)) * Eigen::MatrixXcd::Identity(n, n))
            .inverse();
    const SeriesResult raw = raw_series_partial(z, 24, m.parts, m.e2);
    const Eigen::MatrixXcd raw_diff = raw.partial.dense() - reference;
    const double raw_res = operator_norm(
        SparseOperator(m.basis.dim(), SparseMat(raw_diff.sparseView())));
    out.require(raw_res < 1e-8, fmt("raw residual %.3g (cells=%d)", raw_res, c.cells));
    const SeriesResult reo = reordered_series_partial(z, 6, m.parts, m.e2);
    const Eigen::MatrixXcd agree = reo.partial.dense() - raw.partial.dense();
    const double agree_norm = operator_norm(
        SparseOperator(m.basis.dim(), SparseMat(agree.sparseView())));
    out.require(agree_norm < 1e-8,
                fmt("reordered/raw gap %.3g (cells=%d)", agree_norm, c.cells));
  }

  const std::vector<std::uint64_t> raw_shadow = raw_shadow_coefficients(8);
  const std::vector<std::uint64_t> reo_shadow = reordered_shadow_coefficients(8);
  out.require(raw_shadow == reo_shadow, "shadow regrouping identity broken");
  for (int k = 0; k <= 6; ++k) {
    const std::size_t enumerated =
        enumerate_sequences(k, cat, AdjacencyRule::Standard, 8).size();
    const std::size_t brute = brute_force_count(k, cat, AdjacencyRule::Standard);
    out.require(enumerated == brute,
                fmt("count mismatch at k=%d: %zu vs %zu", k, enumerated, brute));
  }
  return out;
}

Outcome c7_audits() {
  Outcome out;
  AuditSuiteConfig cfg;  // 100 configs, fixed seed
  const std::vector<AuditReport> reports = run_audit_suite(cfg);
  const std::vector<std::string> explicit_ids = {
      "fermion_smearing_bound", "mode_sum_pair", "mode_sum_single",
      "column_smearing_bound", "block_single"};
  for (const AuditReport& r : reports) {
    const bool is_explicit =
        std::find(explicit_ids.begin(), explicit_ids.end(), r.lemma_id) !=
        explicit_ids.end();
    out.require(std::isfinite(r.max_ratio),
                fmt("%s: non-finite ratio", r.lemma_id.c_str()));
    out.require(r.pass, fmt("%s: ratio %.4g over bound %.4g (%s)",
                            r.lemma_id.c_str(), r.max_ratio, r.bound_constant,
                            is_explicit ? "explicit constant" : "ceiling"));
  }

  // hidden-constant refinement stability across grid resolutions
  const DispersionParams dp{1.0, 1.3};
  KernelSpec ks;
  ks.p = 0.5;
  CutoffSpec cs;
  cs.lambda = 4.0;
  const cplx z(-6.0, 0.0);
  for (const BlockCombo combo :
       {BlockCombo::PairCompensated, BlockCombo::PairExchange,
        BlockCombo::TripleToLower}) {
    double lo = 1e300, hi = 0.0;
    for (int cells : {2, 3, 4}) {
      const ModeGrid grid = build_grid(1, 1.5, cells);
      const FockBasis basis(cells, cells, 2);
      const AuditContext ctx = make_audit_context(grid, basis, dp);
      const KernelMatrix km = kernel_matrix(ks, cs, dp, grid);
      std::vector<Eigen::MatrixXcd> kernels;
      std::vector<double> exps;
      if (combo == BlockCombo::PairCompensated) {
        kernels = {km.values2, km.values2};
        exps = {0.25, 0.25};
      } else if (combo == BlockCombo::PairExchange) {
        kernels = {km.values1, km.values1};
        exps = {0.25, 0.25};
      } else {
        kernels = {km.values2, km.values1, km.values2};
        exps = {0.25};
      }
      const AuditReport rep = audit_block_bounds(combo, kernels, z, exps, ctx);
      lo = std::min(lo, rep.max_ratio);
      hi = std::max(hi, rep.max_ratio);
      out.require(std::isfinite(rep.max_ratio) && rep.max_ratio <= 32.0,
                  fmt("combo ratio %.4g out of range", rep.max_ratio));
    }
    out.require(hi <= 1.5 * std::max(lo, 1e-12),
                fmt("refinement-unstable ratios [%.4g, %.4g]", lo, hi));
  }
  if (out.pass) out.detail = fmt("%zu lemma reports on 100 seeded configs", reports.size());
  return out;
}

Outcome c8_resolvent_family() {
  Outcome out;
  CutoffSpec cs;
  cs.lambda = 4.0;
  const BuiltModel m(1, 0.5, 1, 2, {1.0, 1.5}, pair_only(0.8), cs);
  const double base = default_probe(m.cl).real();
  const ResolventProvider provider = [&](cplx z) {
    return cplx(-1.0, 0.0) * reordered_series_partial(z, 5, m.parts, m.e2).partial;
  };
  const ResolventFamilyReport rep = resolvent_family_check(
      cplx(base, 1.0), cplx(1.5 * base, -0.7), provider,
      {base, 10.0 * base, 100.0 * base});
  out.require(rep.adjoint_deviation < 1e-8,
              fmt("adjoint deviation %.3g", rep.adjoint_deviation));
  out.require(rep.identity_deviation < 1e-8,
              fmt("resolvent identity deviation %.3g", rep.identity_deviation));
  out.require(rep.approx_identity_decreasing, "approximate identity not improving");
  if (out.pass)
    out.detail = fmt("adjoint %.2e, identity %.2e", rep.adjoint_deviation,
                     rep.identity_deviation);
  return out;
}

Outcome c9_cauchy() {
  Outcome out;
  const DispersionParams dp{1.0, 1.0};
  KernelSpec ks;
  ks.p = 0.5;
  ks.coupling = 0.1;
  const ModeGrid grid = build_grid(1, 16.0, 6);
  const FockBasis basis(6, 6, 2);
  const double lams[3] = {4.0, 8.0, 16.0};
  KernelMatrix kms[3];
  std::vector<HamiltonianParts> parts;
  double e2s[3], cmax = 0.0;
  for (int i = 0; i < 3; ++i) {
    CutoffSpec cs;
    cs.lambda = lams[i];
    kms[i] = kernel_matrix(ks, cs, dp, grid);
    e2s[i] = e2_discrete(kms[i], dp);
    cmax = std::max(cmax, c_lambda(kms[i], dp));
  }
  for (int i = 0; i < 3; ++i) parts.push_back(build_full(grid, dp, kms[i], basis));
  const cplx z = default_probe(cmax);
  const double d48 = resolvent_distance(parts[0], parts[1], z, e2s[0], e2s[1]);
  const double d416 = resolvent_distance(parts[0], parts[2], z, e2s[0], e2s[2]);
  const double d816 = resolvent_distance(parts[1], parts[2], z, e2s[1], e2s[2]);
  out.require(d48 > 0.0 && d416 > 0.0, "degenerate distances");
  out.require(d816 < d48 && d816 < d416,
              fmt("ordering broken: d(8,16)=%.3g d(4,8)=%.3g d(4,16)=%.3g", d816,
                  d48, d416));
  if (out.pass)
    out.detail = fmt("d(4,8)=%.2e d(4,16)=%.2e d(8,16)=%.2e", d48, d416, d816);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c10_determinism() {
  Outcome out;
  const fs::path dir =
      fs::temp_directory_path() / ("uvlab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir / "seed");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"model": {"d": 1, "p": 0.5, "m_f": 1.2},
               "cutoffs": {"lambda_list": [2.0, 4.0], "chi_shape": "smooth_bump"},
               "discretization": {"q_max": 4.0, "cells_per_axis": 2, "boson_cap": 2},
               "solver": {"depth_limit": 3, "audit_configs": 6}})";
  }
  const std::string cli = UVLAB_CLI_PATH;
  auto exec = [&](const std::string& sub, const std::string& conf,
                  const std::string& outdir) {
    const std::string cmd = cli + " " + sub + " --config " + conf + " --out " +
                            (dir / outdir).string() + " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  for (const std::string sub : {std::string("sweep"), std::string("audit")}) {
    out.require(exec(sub, (dir / "cfg.json").string(), "seed"),
                sub + ": seeding run failed");
    const std::string manifest = (dir / "seed" / "manifest.json").string();
    out.require(exec(sub, manifest, "r1"), sub + ": first manifest run failed");
    out.require(exec(sub, manifest, "r2"), sub + ": second manifest run failed");
    for (const auto& entry : fs::directory_iterator(dir / "r1")) {
      if (entry.path().extension() != ".csv") continue;
      out.require(slurp(entry.path()) ==
                      slurp(dir / "r2" / entry.path().filename()),
                  sub + ": " + entry.path().filename().string() + " differs");
    }
    fs::remove_all(dir / "r1");
    fs::remove_all(dir / "r2");
  }
  fs::remove_all(dir);
  if (out.pass) out.detail = "byte-identical CSVs from one manifest";
  return out;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    double budget_seconds;
    Outcome (*fn)();
  };
  const std::vector<Entry> entries = {
      {1, "ladder algebra exactness", 30, c1_algebra},
      {2, "variational lower bound", 300, c2_lower_bound},
      {3, "second-order energy shift", 120, c3_second_order},
      {4, "divergence frontier", 600, c4_divergence_frontier},
      {5, "feasibility thresholds", 1, c5_thresholds},
      {6, "series machinery", 300, c6_series},
      {7, "lemma audits", 900, c7_audits},
      {8, "resolvent family", 120, c8_resolvent_family},
      {9, "cutoff Cauchy property", 300, c9_cauchy},
      {10, "run determinism", 300, c10_determinism},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    const auto t0 = clock_type::now();
    Outcome out = e.fn();
    const double seconds =
        std::chrono::duration<double>(clock_type::now() - t0).count();
    if (seconds > e.budget_seconds) {
      out.pass = false;
      out.detail += fmt("%sruntime %.1fs over budget %.0fs",
                        out.detail.empty() ? "" : "; ", seconds,
                        e.budget_seconds);
    }
    std::printf("criterion %2d [%s]: %s (%.1fs)%s%s\n", e.id, e.label,
                out.pass ? "PASS" : "FAIL", seconds,
                out.detail.empty() ? "" : " - ", out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(entries.size()) - failures, entries.size());
  return failures == 0 ? 0 : 1;
}
