#include "uvlab/neumann.hpp"

#include <cmath>
#include <stdexcept>

#include "uvlab/linalg.hpp"

namespace uvlab {

namespace {

GVariant make_variant(std::initializer_list<BlockTag> tags, double sign,
                      bool add_e2, std::string label) {
  GVariant v;
  for (auto t : tags) v.blocks.emplace_back(t, standard_kernel(t));
  v.sign = sign;
  v.add_e2 = add_e2;
  v.shadow_multiplicity = add_e2 ? 2 : 1;
  v.label = std::move(label);
  return v;
}

}  // namespace

std::size_t GSetCatalog::total_variants() const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.variants.size();
  return n;
}

GSetCatalog catalog(CatalogConvention conv) {
  GSetCatalog cat;
  cat.convention = conv;
  cat.sets.resize(7);

  auto& g1 = cat.sets[0];
  g1 = {1, 1, 0.0, 0.75, {}};
  g1.variants.push_back(make_variant({BlockTag::ab}, -1.0, false, "-B[ab;2]"));
  g1.variants.push_back(make_variant({BlockTag::abst}, -1.0, false, "-B[ab*;1]"));

  auto& g2 = cat.sets[1];
  g2 = {2, 1, 0.75, 0.0, {}};
  g2.variants.push_back(make_variant({BlockTag::astbst}, -1.0, false, "-B[a*b*;2]"));
  g2.variants.push_back(make_variant({BlockTag::astb}, -1.0, false, "-B[a*b;1]"));

  auto& g3 = cat.sets[2];
  g3 = {3, 2, 0.0, 0.5, {}};
  g3.variants.push_back(make_variant({BlockTag::ab, BlockTag::astb}, 1.0, false,
                                     "B[ab;2] R0 B[a*b;1]"));

  auto& g4 = cat.sets[3];
  g4 = {4, 2, 0.5, 0.0, {}};
  g4.variants.push_back(make_variant({BlockTag::abst, BlockTag::astbst}, 1.0,
                                     false, "B[ab*;1] R0 B[a*b*;2]"));

  auto& g5 = cat.sets[4];
  g5 = {5, 2, 0.25, 0.25, {}};
  g5.variants.push_back(make_variant({BlockTag::ab, BlockTag::astbst}, 1.0, true,
                                     "B[ab;2] R0 B[a*b*;2] + E2"));
  g5.variants.push_back(make_variant({BlockTag::abst, BlockTag::astb}, 1.0,
                                     false, "B[ab*;1] R0 B[a*b;1]"));

  auto& g6 = cat.sets[5];
  g6 = {6, 3, 0.0, 0.25, {}};
  g6.variants.push_back(
      make_variant({BlockTag::ab, BlockTag::abst, BlockTag::astbst}, -1.0, false,
                   "-B[ab;2] R0 B[ab*;1] R0 B[a*b*;2]"));
  if (conv == CatalogConvention::PairingRule) {
    g6.variants.push_back(
        make_variant({BlockTag::abst, BlockTag::abst, BlockTag::astbst}, -1.0,
                     false, "-B[ab*;1] R0 B[ab*;1] R0 B[a*b*;2]"));
  } else {
    // literal reading of the published superscripts, which swap the kernels
    // on the second variant's outer letters
    GVariant v;
    v.blocks = {{BlockTag::abst, 2}, {BlockTag::abst, 1}, {BlockTag::astbst, 1}};
    v.sign = -1.0;
    v.label = "-B[ab*;2] R0 B[ab*;1] R0 B[a*b*;1]";
    g6.variants.push_back(std::move(v));
  }

  auto& g7 = cat.sets[6];
  g7 = {7, 3, 0.25, 0.0, {}};
  g7.variants.push_back(
      make_variant({BlockTag::ab, BlockTag::astb, BlockTag::astbst}, -1.0, false,
                   "-B[ab;2] R0 B[a*b;1] R0 B[a*b*;2]"));
  g7.variants.push_back(
      make_variant({BlockTag::ab, BlockTag::astb, BlockTag::astb}, -1.0, false,
                   "-B[ab;2] R0 B[a*b;1] R0 B[a*b;1]"));

  return cat;
}

bool adjacency_allowed(int j1, int j2, AdjacencyRule rule) {
  if (j1 == 1 && (j2 == 2 || j2 == 4)) return false;
  if (rule == AdjacencyRule::Standard) {
    if (j1 == 3 && j2 == 2) return false;
  } else {
    if (j1 == 4 && j2 == 2) return false;
  }
  return true;
}

bool exponents_compatible(const GSetCatalog& cat, int j1, int j2) {
  return cat.set(j1).mu + cat.set(j2).nu <= 1.0 + 1e-15;
}

std::vector<AdmissibleSequence> enumerate_sequences(int k, const GSetCatalog& cat,
                                                    AdjacencyRule rule,
                                                    int depth_limit) {
  if (k < 0) throw std::invalid_argument("enumerate_sequences: k must be >= 0");
  if (k > depth_limit)
    throw std::invalid_argument("enumerate_sequences: k above the depth limit");

  std::vector<AdmissibleSequence> out;
  AdmissibleSequence cur;
  // depth-first in (j, variant) order gives a deterministic lexicographic list
  const std::function<void(int, int)> dfs = [&](int remaining, int prev_j) {
    if (remaining == 0) {
      out.push_back(cur);
      out.back().total_weight = k;
      return;
    }
    for (int j = 1; j <= 7; ++j) {
      const auto& set = cat.set(j);
      if (set.n_op > remaining) continue;
      if (prev_j != 0 && !adjacency_allowed(prev_j, j, rule)) continue;
      if (prev_j != 0 && !exponents_compatible(cat, prev_j, j)) continue;
      for (int v = 0; v < static_cast<int>(set.variants.size()); ++v) {
        cur.terms.emplace_back(j, v);
        dfs(remaining - set.n_op, j);
        cur.terms.pop_back();
      }
    }
  };
  dfs(k, 0);
  return out;
}

namespace {

// sign * B1 R0 B2 R0 B3 (+ e2) for one variant
SparseOperator variant_operator(const GVariant& var, cplx z,
                                const HamiltonianParts& parts, double e2) {
  SparseOperator op;
  bool first = true;
  const SparseOperator r0 = free_resolvent_power(parts.h0_diag, z, 1.0);
  for (const auto& [tag, sharp] : var.blocks) {
    SparseOperator blk = (sharp == standard_kernel(tag))
                             ? parts.block(tag)
                             : build_block_kernel(tag, sharp, *parts.km,
                                                  *parts.basis);
    if (first) {
      op = std::move(blk);
      first = false;
    } else {
      op = op * r0 * blk;
    }
  }
  op = cplx(var.sign, 0.0) * op;
  if (var.add_e2)
    op = op + cplx(e2, 0.0) * SparseOperator::identity(op.dim);
  return op;
}

}  // namespace

SparseOperator term_matrix(const AdmissibleSequence& seq, cplx z,
                           const HamiltonianParts& parts, double e2,
                           const GSetCatalog& cat) {
  if (z.real() >= 0.0)
    throw std::invalid_argument("term_matrix: Re z must be negative");
  const auto rpow = [&](double alpha) {
    return free_resolvent_power(parts.h0_diag, z, alpha);
  };
  if (seq.terms.empty()) return rpow(1.0);

  const int l = static_cast<int>(seq.terms.size());
  const double nu_first = cat.set(seq.terms.front().first).nu;
  SparseOperator acc = rpow(1.0 - nu_first);
  for (int i = 0; i < l; ++i) {
    const auto [j, v] = seq.terms[i];
    const auto& set = cat.set(j);
    SparseOperator t = variant_operator(set.variants.at(v), z, parts, e2);
    // (R0^nu T R0^mu)
    acc = acc * rpow(set.nu) * t * rpow(set.mu);
    // connector to the next letter, or the trailing power
    const double next_nu = (i + 1 < l) ? cat.set(seq.terms[i + 1].first).nu : 0.0;
    const double rest = 1.0 - set.mu - next_nu;
    if (rest < -1e-15)
      throw std::logic_error("term_matrix: incompatible exponent split");
    acc = acc * rpow(std::max(0.0, rest));
  }
  return acc;
}

std::vector<double> term_factor_norms(const AdmissibleSequence& seq, cplx z,
                                      const HamiltonianParts& parts, double e2,
                                      const GSetCatalog& cat) {
  std::vector<double> norms;
  const auto rpow = [&](double alpha) {
    return free_resolvent_power(parts.h0_diag, z, alpha);
  };
  for (std::size_t i = 0; i < seq.terms.size(); ++i) {
    const auto [j, v] = seq.terms[i];
    const auto& set = cat.set(j);
    SparseOperator t = variant_operator(set.variants.at(v), z, parts, e2);
    norms.push_back(operator_norm(rpow(set.nu) * t * rpow(set.mu)));
  }
  return norms;
}

namespace {

bool detect_divergence(const std::vector<double>& norms) {
  // non-decreasing over 5 consecutive orders
  int run = 0;
  for (std::size_t i = 1; i < norms.size(); ++i) {
    run = norms[i] >= norms[i - 1] && norms[i] > 0.0 ? run + 1 : 0;
    if (run >= 5) return true;
  }
  return false;
}

}  // namespace

SeriesResult raw_series_partial(cplx z, int N, const HamiltonianParts& parts,
                                double e2) {
  if (z.real() >= 0.0)
    throw std::invalid_argument("raw_series_partial: Re z must be negative");
  SeriesResult res;
  const SparseOperator r0 = free_resolvent_power(parts.h0_diag, z, 1.0);
  const SparseOperator a =
      parts.hab + parts.hastbst + parts.hastb + parts.habst -
      cplx(e2, 0.0) * SparseOperator::identity(parts.h0.dim);
  SparseOperator factor = cplx(-1.0, 0.0) * (a * r0);
  SparseOperator term = r0;
  res.partial = r0;
  res.term_norms.push_back(term.mat.norm());
  for (int k = 1; k <= N; ++k) {
    term = term * factor;
    res.partial = res.partial + term;
    res.term_norms.push_back(term.mat.norm());
  }
  res.diverging = detect_divergence(res.term_norms);
  return res;
}

SeriesResult reordered_series_partial(cplx z, int K, const HamiltonianParts& parts,
                                      double e2, const GSetCatalog& cat,
                                      AdjacencyRule rule) {
  if (z.real() >= 0.0)
    throw std::invalid_argument("reordered_series_partial: Re z must be negative");
  SeriesResult res;
  res.partial = free_resolvent_power(parts.h0_diag, z, 1.0);
  res.term_norms.push_back(res.partial.mat.norm());
  for (int k = 1; k <= K; ++k) {
    SparseOperator weight_sum = SparseOperator::zero(parts.h0.dim);
    for (const auto& seq : enumerate_sequences(k, cat, rule, std::max(K, 12)))
      weight_sum = weight_sum + term_matrix(seq, z, parts, e2, cat);
    res.partial = res.partial + weight_sum;
    res.term_norms.push_back(weight_sum.mat.norm());
  }
  res.diverging = detect_divergence(res.term_norms);
  return res;
}

ResolventFamilyReport resolvent_family_check(cplx z1, cplx z2,
                                             const ResolventProvider& provider,
                                             const std::vector<double>& schedule) {
  ResolventFamilyReport rep;
  SparseOperator r1 = provider(z1);
  SparseOperator r2 = provider(z2);
  SparseOperator r1bar = provider(std::conj(z1));

  rep.adjoint_deviation = operator_norm(r1.adjoint() - r1bar);
  rep.identity_deviation =
      operator_norm(r1 - r2 - (z2 - z1) * (r1 * r2));

  // deterministic probes: first basis vector and the normalized all-ones
  const auto dim = static_cast<Eigen::Index>(r1.dim);
  std::vector<Eigen::VectorXcd> probes;
  Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(dim);
  e0(0) = 1.0;
  probes.push_back(e0);
  probes.push_back(Eigen::VectorXcd::Ones(dim) / std::sqrt(double(dim)));

  for (double re : schedule) {
    const cplx z(re, 0.0);
    SparseOperator r = provider(z);
    double worst = 0.0;
    for (const auto& psi : probes)
      worst = std::max(worst, (z * (r.mat * psi) - psi).norm());
    rep.approx_identity.push_back(worst);
  }
  rep.approx_identity_decreasing = true;
  for (std::size_t i = 1; i < rep.approx_identity.size(); ++i)
    if (rep.approx_identity[i] >= rep.approx_identity[i - 1])
      rep.approx_identity_decreasing = false;
  return rep;
}

std::vector<std::uint64_t> raw_shadow_coefficients(int k_max) {
  std::vector<std::uint64_t> c(k_max + 1, 0);
  c[0] = 1;
  if (k_max >= 1) c[1] = 4;
  for (int k = 2; k <= k_max; ++k) c[k] = 4 * c[k - 1] + c[k - 2];
  return c;
}

std::vector<std::uint64_t> reordered_shadow_coefficients(int k_max,
                                                         const GSetCatalog& cat,
                                                         AdjacencyRule rule) {
  std::vector<std::uint64_t> c(k_max + 1, 0);
  c[0] = 1;
  for (int k = 1; k <= k_max; ++k) {
    std::uint64_t sum = 0;
    for (const auto& seq : enumerate_sequences(k, cat, rule, std::max(k_max, 12))) {
      std::uint64_t m = 1;
      for (const auto& [j, v] : seq.terms)
        m *= cat.set(j).variants.at(v).shadow_multiplicity;
      sum += m;
    }
    c[k] = sum;
  }
  return c;
}

}  // namespace uvlab
