// uvlab: batch front-end for the truncated Yukawa-type model toolbox.
//
// Subcommands: algebra-check, build, counterterm, thresholds, neumann,
// enumerate, audit, sweep. Each writes one or more CSV files plus a
// manifest.json echoing the configuration, so a run can be reproduced from
// its manifest alone.
//
// Exit codes: 0 success, 1 invalid configuration, 2 numerical
// non-convergence, 3 invariant violation.

#include <omp.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uvlab/counterterm.hpp"
#include "uvlab/estimates.hpp"
#include "uvlab/neumann.hpp"
#include "uvlab/spectra.hpp"

using json = nlohmann::ordered_json;
using namespace uvlab;

namespace {

constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// configuration

struct RunConfig {
  // model
  int d = 1;
  double p = 0.5;
  double m_b = 1.0;
  double m_f = 1.0;
  std::string h1 = "one";
  std::string h2 = "one";
  double coupling = 1.0;
  // cutoffs
  std::vector<double> lambda_list = {1.0, 2.0, 4.0};
  std::string chi_shape = "indicator";
  int n = 1;
  std::string f_shape = "ball_indicator";
  // discretization
  double q_max = 4.0;
  int cells_per_axis = 2;
  int boson_cap = 2;
  std::string fermion_modes = "grid";
  // solver
  double tol = 1e-9;
  double series_tol = 1e-8;
  int depth_limit = 6;
  std::uint64_t seed = 41;
  int audit_configs = 100;
  int quad_resolution = 32;
  long quad_max_evals = 40000000;
  std::vector<double> coupling_grid = {0.0125, 0.025, 0.0375, 0.05};
  std::string adjacency = "standard";
  std::string convention = "pairing_rule";
  // output
  int csv_digits = 17;
};

ChiShape parse_chi(const std::string& s) {
  if (s == "indicator") return ChiShape::Indicator;
  if (s == "smooth_bump") return ChiShape::SmoothBump;
  throw std::invalid_argument("config: unknown chi_shape '" + s + "'");
}

FShape parse_f(const std::string& s) {
  if (s == "ball_indicator") return FShape::BallIndicator;
  if (s == "normalized_bump") return FShape::NormalizedBump;
  throw std::invalid_argument("config: unknown f_shape '" + s + "'");
}

AdjacencyRule parse_adjacency(const std::string& s) {
  if (s == "standard") return AdjacencyRule::Standard;
  if (s == "alternate") return AdjacencyRule::Alternate;
  throw std::invalid_argument("config: unknown adjacency rule '" + s + "'");
}

CatalogConvention parse_convention(const std::string& s) {
  if (s == "pairing_rule") return CatalogConvention::PairingRule;
  if (s == "literal_letters") return CatalogConvention::LiteralLetters;
  throw std::invalid_argument("config: unknown catalog convention '" + s + "'");
}

void validate(const RunConfig& c) {
  if (c.d < 1 || c.d > 3) throw std::invalid_argument("config: d must be 1, 2 or 3");
  if (c.p < 0.0) throw std::invalid_argument("config: p must be >= 0");
  if (c.m_b <= 0.0 || c.m_f <= 0.0)
    throw std::invalid_argument("config: masses must be positive");
  if (c.h1 != "one" && c.h1 != "zero")
    throw std::invalid_argument("config: h1 must be 'one' or 'zero'");
  if (c.h2 != "one" && c.h2 != "zero")
    throw std::invalid_argument("config: h2 must be 'one' or 'zero'");
  if (c.lambda_list.empty())
    throw std::invalid_argument("config: lambda_list must not be empty");
  for (std::size_t i = 0; i + 1 < c.lambda_list.size(); ++i)
    if (!(c.lambda_list[i] < c.lambda_list[i + 1]))
      throw std::invalid_argument("config: lambda_list must be strictly increasing");
  if (!(c.lambda_list.front() > 0.0))
    throw std::invalid_argument("config: cutoffs must be positive");
  parse_chi(c.chi_shape);
  parse_f(c.f_shape);
  parse_adjacency(c.adjacency);
  parse_convention(c.convention);
  if (c.n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (c.q_max < c.lambda_list.back() * CutoffSpec::r_chi)
    throw std::invalid_argument(
        "config: q_max must be at least max(lambda_list) * r_chi");
  if (c.cells_per_axis < 1)
    throw std::invalid_argument("config: cells_per_axis must be >= 1");
  if (c.boson_cap < 0) throw std::invalid_argument("config: boson_cap must be >= 0");
  if (c.fermion_modes != "grid")
    throw std::invalid_argument("config: fermion_modes must be 'grid'");
  if (!(c.tol > 0.0) || !(c.series_tol > 0.0))
    throw std::invalid_argument("config: tolerances must be positive");
  if (c.depth_limit < 0)
    throw std::invalid_argument("config: depth_limit must be >= 0");
  if (c.audit_configs < 1)
    throw std::invalid_argument("config: audit_configs must be >= 1");
  if (c.quad_resolution < 2)
    throw std::invalid_argument("config: quad_resolution must be >= 2");
  for (double l : c.coupling_grid)
    if (!(l > 0.0))
      throw std::invalid_argument("config: coupling_grid entries must be positive");
  if (c.csv_digits < 6 || c.csv_digits > 17)
    throw std::invalid_argument("config: csv_digits must be in [6, 17]");
}

json to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"d", c.d},        {"p", c.p},   {"m_b", c.m_b},
                {"m_f", c.m_f},    {"h1", c.h1}, {"h2", c.h2},
                {"coupling", c.coupling}};
  j["cutoffs"] = {{"lambda_list", c.lambda_list},
                  {"chi_shape", c.chi_shape},
                  {"n", c.n},
                  {"f_shape", c.f_shape}};
  j["discretization"] = {{"q_max", c.q_max},
                         {"cells_per_axis", c.cells_per_axis},
                         {"boson_cap", c.boson_cap},
                         {"fermion_modes", c.fermion_modes}};
  j["solver"] = {{"tol", c.tol},
                 {"series_tol", c.series_tol},
                 {"depth_limit", c.depth_limit},
                 {"seed", c.seed},
                 {"audit_configs", c.audit_configs},
                 {"quad_resolution", c.quad_resolution},
                 {"quad_max_evals", c.quad_max_evals},
                 {"coupling_grid", c.coupling_grid},
                 {"adjacency", c.adjacency},
                 {"convention", c.convention}};
  j["output"] = {{"csv_digits", c.csv_digits}};
  return j;
}

template <typename T>
void read_key(const json& block, const char* key, T& out) {
  if (block.contains(key)) out = block.at(key).get<T>();
}

RunConfig from_json(const json& j) {
  RunConfig c;
  const json model = j.value("model", json::object());
  read_key(model, "d", c.d);
  read_key(model, "p", c.p);
  read_key(model, "m_b", c.m_b);
  read_key(model, "m_f", c.m_f);
  read_key(model, "h1", c.h1);
  read_key(model, "h2", c.h2);
  read_key(model, "coupling", c.coupling);
  const json cut = j.value("cutoffs", json::object());
  read_key(cut, "lambda_list", c.lambda_list);
  read_key(cut, "chi_shape", c.chi_shape);
  read_key(cut, "n", c.n);
  read_key(cut, "f_shape", c.f_shape);
  const json disc = j.value("discretization", json::object());
  read_key(disc, "q_max", c.q_max);
  read_key(disc, "cells_per_axis", c.cells_per_axis);
  read_key(disc, "boson_cap", c.boson_cap);
  read_key(disc, "fermion_modes", c.fermion_modes);
  const json solver = j.value("solver", json::object());
  read_key(solver, "tol", c.tol);
  read_key(solver, "series_tol", c.series_tol);
  read_key(solver, "depth_limit", c.depth_limit);
  read_key(solver, "seed", c.seed);
  read_key(solver, "audit_configs", c.audit_configs);
  read_key(solver, "quad_resolution", c.quad_resolution);
  read_key(solver, "quad_max_evals", c.quad_max_evals);
  read_key(solver, "coupling_grid", c.coupling_grid);
  read_key(solver, "adjacency", c.adjacency);
  read_key(solver, "convention", c.convention);
  const json out = j.value("output", json::object());
  read_key(out, "csv_digits", c.csv_digits);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  json j = json::parse(in);
  // a manifest embeds the configuration under "config"; accept both layouts
  if (j.contains("config")) j = j.at("config");
  return from_json(j);
}

// ---------------------------------------------------------------------------
// model assembly from a config

KernelSpec kernel_spec(const RunConfig& c) {
  KernelSpec ks;
  ks.p = c.p;
  ks.coupling = c.coupling;
  auto zero_fn = [](const Eigen::Vector3d&, const Eigen::Vector3d&) {
    return cplx(0.0, 0.0);
  };
  if (c.h1 == "zero") {
    ks.h1 = zero_fn;
    ks.h1_sup = 0.0;
  }
  if (c.h2 == "zero") {
    ks.h2 = zero_fn;
    ks.h2_sup = 0.0;
  }
  return ks;
}

CutoffSpec cutoff_spec(const RunConfig& c, double lambda) {
  CutoffSpec cs;
  cs.lambda = lambda;
  cs.chi_shape = parse_chi(c.chi_shape);
  cs.n = c.n;
  cs.f_shape = parse_f(c.f_shape);
  return cs;
}

DispersionParams dispersion_params(const RunConfig& c) { return {c.m_b, c.m_f}; }

// ---------------------------------------------------------------------------
// CSV output

struct CsvWriter {
  std::ofstream out;
  int digits = 17;

  CsvWriter(const std::filesystem::path& path, const std::string& header,
            int digits_in)
      : out(path, std::ios::binary), digits(digits_in) {
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    out << header << "\n";
  }

  std::string num(double v) const {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
  }
  static std::string quoted(const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    q += '"';
    return q;
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << "\n";
  }
};

std::string bool_str(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------------------
// run context shared by the subcommands

struct RunContext {
  RunConfig cfg;
  std::filesystem::path out_dir;
  int threads = 0;  ///< 0 = library default
  bool has_z = false;
  double z_override = 0.0;
  std::vector<std::string> outputs;

  std::filesystem::path file(const std::string& name) {
    outputs.push_back(name);
    return out_dir / name;
  }
};

int run_algebra_check(RunContext& rc) {
  const RunConfig& c = rc.cfg;
  const ModeGrid grid = build_grid(c.d, c.q_max, c.cells_per_axis);
  const FockBasis basis(static_cast<int>(grid.size()), static_cast<int>(grid.size()),
                        c.boson_cap);
  const AlgebraReport rep = algebra_report(basis);
  CsvWriter csv(rc.file("algebra_check.csv"),
                "dim,max_car_violation,max_ccr_violation,max_mixed_violation,"
                "cap_boundary_states,pass",
                c.csv_digits);
  csv.row({std::to_string(basis.dim()), csv.num(rep.max_car_violation),
           csv.num(rep.max_ccr_violation), csv.num(rep.max_mixed_violation),
           std::to_string(rep.cap_boundary_states), bool_str(rep.pass())});
  return rep.pass() ? 0 : 3;
}

int run_build(RunContext& rc) {
  const RunConfig& c = rc.cfg;
  const ModeGrid grid = build_grid(c.d, c.q_max, c.cells_per_axis);
  const FockBasis basis(static_cast<int>(grid.size()), static_cast<int>(grid.size()),
                        c.boson_cap);
  const KernelSpec ks = kernel_spec(c);
  const DispersionParams dp = dispersion_params(c);
  CsvWriter csv(rc.file("build.csv"),
                "lambda,dim,nonzeros,hermitian,c_lambda,e2_discrete", c.csv_digits);
  for (double lambda : c.lambda_list) {
    const KernelMatrix km = kernel_matrix(ks, cutoff_spec(c, lambda), dp, grid);
    const HamiltonianParts parts = build_full(grid, dp, km, basis);
    csv.row({csv.num(lambda), std::to_string(parts.h_full.dim),
             std::to_string(static_cast<long long>(parts.h_full.mat.nonZeros())),
             bool_str(parts.h_full.hermitian), csv.num(c_lambda(km, dp)),
             csv.num(e2_discrete(km, dp))});
  }
  return 0;
}

int run_counterterm(RunContext& rc) {
  const RunConfig& c = rc.cfg;
  const KernelSpec ks = kernel_spec(c);
  const DispersionParams dp = dispersion_params(c);
  QuadratureSpec qs;
  qs.resolution = c.quad_resolution;
  qs.max_evals = c.quad_max_evals;
  qs.seed = c.seed;

  CsvWriter csv(rc.file("counterterm.csv"),
                "lambda,e2_quadrature,error_estimate,converged,evals,diff_prev",
                c.csv_digits);
  std::vector<double> values;
  bool all_converged = true;
  for (double lambda : c.lambda_list) {
    const QuadResult qr = e2_quadrature(ks, cutoff_spec(c, lambda), dp, c.d, qs);
    const double diff = values.empty() ? 0.0 : qr.value - values.back();
    csv.row({csv.num(lambda), csv.num(qr.value), csv.num(qr.error_estimate),
             bool_str(qr.converged), std::to_string(qr.evals), csv.num(diff)});
    values.push_back(qr.value);
    all_converged = all_converged && qr.converged;
  }

  // least-squares fit of E2 against log(Lambda) across the sweep
  CsvWriter fit(rc.file("counterterm_fit.csv"),
                "n_points,slope,intercept,r_squared", c.csv_digits);
  const std::size_t m = values.size();
  double slope = 0.0, intercept = values.empty() ? 0.0 : values[0], r2 = 1.0;
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = std::log(c.lambda_list[i]);
      sx += x;
      sy += values[i];
      sxx += x * x;
      sxy += x * values[i];
    }
    const double denom = m * sxx - sx * sx;
    slope = (m * sxy - sx * sy) / denom;
    intercept = (sy - slope * sx) / m;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / m;
    for (std::size_t i = 0; i < m; ++i) {
      const double pred = intercept + slope * std::log(c.lambda_list[i]);
      ss_res += (values[i] - pred) * (values[i] - pred);
      ss_tot += (values[i] - mean) * (values[i] - mean);
    }
    r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  }
  fit.row({std::to_string(m), fit.num(slope), fit.num(intercept), fit.num(r2)});
  return all_converged ? 0 : 2;
}

int run_thresholds(RunContext& rc) {
  const RunConfig& c = rc.cfg;
  CsvWriter csv(rc.file("thresholds.csv"),
                "d,p,beta_min_k1,beta_min_k2,beta_min_k3,scheme_feasible",
                c.csv_digits);
  for (int d = 1; d <= 3; ++d) {
    const ThresholdReport tr = thresholds(d, c.p);
    csv.row({std::to_string(d), csv.num(c.p), csv.num(tr.beta_min_k1),
             csv.num(tr.beta_min_k2), csv.num(tr.beta_min_k3),
             bool_str(tr.scheme_feasible)});
  }
  return 0;
}

int run_neumann(RunContext& rc) {
  const RunConfig& c = rc.cfg;
  const ModeGrid grid = build_grid(c.d, c.q_max, c.cells_per_axis);
  const FockBasis basis(static_cast<int>(grid.size()), static_cast<int>(grid.size()),
                        c.boson_cap);
  if (basis.dim() > 2048)
    throw std::invalid_argument(
        "neumann: basis dimension exceeds 2048; the direct reference solve "
        "needs a dense inverse");
  const DispersionParams dp = dispersion_params(c);
  const KernelMatrix km =
      kernel_matrix(kernel_spec(c), cutoff_spec(c, c.lambda_list.back()), dp, grid);
  const HamiltonianParts parts = build_full(grid, dp, km, basis);
  const double e2 = e2_discrete(km, dp);
  const double cl = c_lambda(km, dp);
  const cplx z = rc.has_z ? cplx(rc.z_override, 0.0) : default_probe(cl);

  const auto n = static_cast<Eigen::Index>(basis.dim());
  const Eigen::MatrixXcd reference =
      (parts.h_full.dense() -
       (z + cplx(e2, 0.0)) * Eigen::MatrixXcd::Identity(n, n))
          .inverse();
  const GSetCatalog cat = catalog(parse_convention(c.convention));
  const AdjacencyRule rule = parse_adjacency(c.adjacency);

  CsvWriter csv(rc.file("neumann.csv"),
                "depth,raw_residual,reordered_residual,raw_term_norm,"
                "shadow_coefficient",
                c.csv_digits);
  const int depth = c.depth_limit;
  const std::vector<std::uint64_t> shadow = raw_shadow_coefficients(depth);
  double final_raw = 0.0, final_reordered = 0.0;
  bool diverging = false;
  for (int k = 0; k <= depth; ++k) {
    const SeriesResult raw = raw_series_partial(z, k, parts, e2);
    const SeriesResult reo = reordered_series_partial(z, k, parts, e2, cat, rule);
    const Eigen::MatrixXcd raw_diff = raw.partial.dense() - reference;
    const Eigen::MatrixXcd reo_diff = reo.partial.dense() - reference;
    const double raw_res =
        operator_norm(SparseOperator(basis.dim(), SparseMat(raw_diff.sparseView())));
    const double reo_res =
        operator_norm(SparseOperator(basis.dim(), SparseMat(reo_diff.sparseView())));
    diverging = diverging || raw.diverging;
    csv.row({std::to_string(k), csv.num(raw_res), csv.num(reo_res),
             csv.num(raw.term_norms.empty() ? 0.0 : raw.term_norms.back()),
             std::to_string(shadow[static_cast<std::size_t>(k)])});
    if (k == depth) {
      final_raw = raw_res;
      final_reordered = reo_res;
    }
  }
  return (!diverging && final_raw <= c.series_tol &&
          final_reordered <= c.series_tol)
             ? 0
             : 2;
}

int run_enumerate(RunContext& rc) {
  const RunConfig& c = rc.cfg;
  const GSetCatalog cat = catalog(parse_convention(c.convention));
  CsvWriter csv(rc.file("enumerate.csv"),
                "k,count_standard,count_alternate,shadow_raw,shadow_reordered",
                c.csv_digits);
  const int k_max = c.depth_limit;
  const std::vector<std::uint64_t> raw = raw_shadow_coefficients(k_max);
  const std::vector<std::uint64_t> reo =
      reordered_shadow_coefficients(k_max, cat, AdjacencyRule::Standard);
  for (int k = 0; k <= k_max; ++k) {
    const auto std_count =
        enumerate_sequences(k, cat, AdjacencyRule::Standard, k_max).size();
    const auto alt_count =
        enumerate_sequences(k, cat, AdjacencyRule::Alternate, k_max).size();
    csv.row({std::to_string(k), std::to_string(std_count),
             std::to_string(alt_count),
             std::to_string(raw[static_cast<std::size_t>(k)]),
             std::to_string(reo[static_cast<std::size_t>(k)])});
  }
  return 0;
}

int run_audit(RunContext& rc) {
  const RunConfig& c = rc.cfg;
  AuditSuiteConfig asc;
  asc.configs = c.audit_configs;
  asc.seed = c.seed;
  asc.cells = c.cells_per_axis;
  asc.q_max = c.q_max;
  asc.boson_cap = c.boson_cap;
  const std::vector<AuditReport> reports = run_audit_suite(asc);
  CsvWriter csv(rc.file("audit.csv"),
                "lemma_id,samples,max_ratio,bound_constant,pass,worst_config",
                c.csv_digits);
  bool all_pass = true;
  for (const AuditReport& r : reports) {
    csv.row({r.lemma_id, std::to_string(r.samples), csv.num(r.max_ratio),
             csv.num(r.bound_constant), bool_str(r.pass),
             CsvWriter::quoted(r.worst_config)});
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 3;
}

int run_sweep(RunContext& rc) {
  const RunConfig& c = rc.cfg;
  SpectralConfig sc;
  sc.d = c.d;
  sc.masses = dispersion_params(c);
  sc.kernel = kernel_spec(c);
  sc.cutoff = cutoff_spec(c, c.lambda_list.back());
  sc.q_max = c.q_max;
  sc.cells_per_axis = c.cells_per_axis;
  sc.boson_cap = c.boson_cap;
  sc.tol = c.tol;
  const SweepResult res = renormalized_sweep(sc, c.lambda_list);
  CsvWriter csv(rc.file("sweep.csv"),
                "lambda,e_lambda,e2,renormalized,c_lambda,gap,residual",
                c.csv_digits);
  for (const SweepRow& row : res.rows)
    csv.row({csv.num(row.lambda_uv), csv.num(row.e_lambda), csv.num(row.e2),
             csv.num(row.renormalized), csv.num(row.c_lambda), csv.num(row.gap),
             csv.num(row.residual)});
  CsvWriter diag(rc.file("sweep_diagnostics.csv"),
                 "rows,stabilizing,bound_violated,last_delta", c.csv_digits);
  diag.row({std::to_string(res.rows.size()), bool_str(res.stabilizing),
            bool_str(res.bound_violated),
            diag.num(res.renorm_deltas.empty() ? 0.0 : res.renorm_deltas.back())});
  return res.bound_violated ? 3 : 0;
}

void write_manifest(RunContext& rc, const std::string& subcommand, int exit_code,
                    double seconds) {
  json m;
  m["subcommand"] = subcommand;
  m["config"] = to_json(rc.cfg);
  m["versions"] = {{"uvlab", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  m["seed"] = rc.cfg.seed;
  m["threads"] = rc.threads;
  if (rc.has_z) m["z"] = rc.z_override;
  m["outputs"] = rc.outputs;
  m["timings"] = {{"total_seconds", seconds}};
  m["exit_code"] = exit_code;
  std::ofstream out(rc.out_dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"truncated Yukawa-type model toolbox"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int k_override = -1;
  std::vector<double> lambda_override;
  double z_value = 0.0;
  bool has_z = false;

  app.add_option("--config", config_path, "configuration or manifest JSON file");
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--threads", threads, "worker thread count (0 = default)");
  app.add_option("--seed", seed, "override the solver seed")
      ->each([&](const std::string&) { has_seed = true; });

  const std::vector<std::string> names = {"algebra-check", "build", "counterterm",
                                          "thresholds",    "neumann", "enumerate",
                                          "audit",         "sweep"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->fallthrough();  // global options may follow the subcommand
    if (name == "neumann" || name == "enumerate") {
      sub->add_option("--k", k_override, "series depth / weight limit");
    }
    if (name == "build" || name == "counterterm" || name == "sweep" ||
        name == "neumann") {
      sub->add_option("--lambda-list", lambda_override, "cutoff list override")
          ->delimiter(',');
    }
    if (name == "neumann") {
      sub->add_option("--z", z_value, "real resolvent probe point")
          ->each([&](const std::string&) { has_z = true; });
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto started = std::chrono::steady_clock::now();
  RunContext rc;
  std::string subcommand;
  int code = 0;
  try {
    rc.cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (has_seed) rc.cfg.seed = seed;
    if (k_override >= 0) rc.cfg.depth_limit = k_override;
    if (!lambda_override.empty()) rc.cfg.lambda_list = lambda_override;
    validate(rc.cfg);

    if (threads == 0) {
      if (const char* env = std::getenv("UVLAB_THREADS")) threads = std::atoi(env);
    }
    rc.threads = threads;
    if (threads > 0) omp_set_num_threads(threads);
    rc.out_dir = out_dir;
    std::filesystem::create_directories(rc.out_dir);
    rc.has_z = has_z;
    rc.z_override = z_value;
    if (has_z && !(z_value < 0.0))
      throw std::invalid_argument("--z must be negative");

    subcommand = app.get_subcommands().front()->get_name();
    if (subcommand == "algebra-check") code = run_algebra_check(rc);
    else if (subcommand == "build") code = run_build(rc);
    else if (subcommand == "counterterm") code = run_counterterm(rc);
    else if (subcommand == "thresholds") code = run_thresholds(rc);
    else if (subcommand == "neumann") code = run_neumann(rc);
    else if (subcommand == "enumerate") code = run_enumerate(rc);
    else if (subcommand == "audit") code = run_audit(rc);
    else if (subcommand == "sweep") code = run_sweep(rc);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  try {
    write_manifest(rc, subcommand, code, seconds);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (code == 2) std::cerr << "error: numerical non-convergence\n";
  if (code == 3) std::cerr << "error: invariant violation\n";
  return code;
}
