#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "uvlab/counterterm.hpp"
#include "uvlab/modegrid.hpp"

using namespace uvlab;

TEST_CASE("e2_discrete closed forms") {
  DispersionParams dp;
  SUBCASE("zero kernel") {
    ModeGrid grid = build_grid(1, 1.0, 2);
    KernelMatrix km;
    km.grid = &grid;
    km.w = grid.w;
    km.values1 = km.values2 = Eigen::MatrixXcd::Zero(2, 2);
    CHECK(e2_discrete(km, dp) == 0.0);
  }
  SUBCASE("single cell") {
    ModeGrid grid = build_grid(1, 0.5, 1);
    KernelMatrix km;
    km.grid = &grid;
    km.w = 1.0;
    km.values1 = Eigen::MatrixXcd::Zero(1, 1);
    km.values2 = Eigen::MatrixXcd::Constant(1, 1, cplx(0.8, 0.6));
    const double omega_sum =
        dispersion(ParticleKind::Fermion, grid.centers[0], dp) +
        dispersion(ParticleKind::Boson, grid.centers[0], dp);
    CHECK(e2_discrete(km, dp) == doctest::Approx(-1.0 / omega_sum));
  }
  SUBCASE("always nonpositive, strictly negative iff nonzero") {
    KernelSpec ks;
    CutoffSpec cs;
    cs.lambda = 3.0;
    ModeGrid grid = build_grid(1, 2.0, 6);
    auto km = kernel_matrix(ks, cs, dp, grid);
    CHECK(e2_discrete(km, dp) < 0.0);
  }
}

TEST_CASE("discrete sum approaches the continuum quadrature under refinement") {
  DispersionParams dp;
  KernelSpec ks;
  ks.p = 0.5;
  CutoffSpec cs;
  cs.lambda = 2.0;
  cs.n = 1;

  QuadratureSpec qs;
  qs.method = QuadMethod::AdaptiveRadial;
  qs.resolution = 512;
  qs.error_target = 1e-7;
  auto cont = e2_quadrature(ks, cs, dp, 1, qs);
  REQUIRE(cont.converged);

  double prev_gap = 1e300;
  bool first = true;
  for (int cells : {40, 80, 160, 320}) {
    auto grid = build_grid(1, 2.5, cells);
    auto km = kernel_matrix(ks, cs, dp, grid);
    const double gap = std::abs(e2_discrete(km, dp) - cont.value);
    if (!first) CHECK(gap < prev_gap);
    first = false;
    prev_gap = gap;
  }
  CHECK(prev_gap <= 5e-3);
}

TEST_CASE("quadrature methods agree (d=1)") {
  DispersionParams dp;
  KernelSpec ks;
  ks.p = 0.5;
  CutoffSpec cs;
  cs.lambda = 10.0;
  cs.n = 1;

  QuadratureSpec rad;
  rad.method = QuadMethod::AdaptiveRadial;
  rad.resolution = 512;
  rad.error_target = 1e-6;
  auto a = e2_quadrature(ks, cs, dp, 1, rad);
  REQUIRE(a.converged);
  CHECK(a.value < 0.0);

  QuadratureSpec tm;
  tm.method = QuadMethod::TensorMidpoint;
  tm.resolution = 400;
  tm.error_target = 1e-3;
  tm.max_evals = 400000000;
  auto b = e2_quadrature(ks, cs, dp, 1, tm);
  CHECK(std::abs(a.value - b.value) <=
        2.0 * (a.error_estimate + b.error_estimate) + 1e-4);

  QuadratureSpec mc;
  mc.method = QuadMethod::MonteCarlo;
  mc.error_target = 5e-2;
  mc.seed = 2024;
  auto c = e2_quadrature(ks, cs, dp, 1, mc);
  CHECK(std::abs(a.value - c.value) <= 4.0 * (c.error_estimate + 1e-4));

  SUBCASE("monte-carlo is reproducible for a fixed seed") {
    auto c2 = e2_quadrature(ks, cs, dp, 1, mc);
    CHECK(c.value == c2.value);
  }
}

TEST_CASE("zero coefficient integrates to zero") {
  DispersionParams dp;
  KernelSpec ks;
  ks.h2 = [](const Eigen::Vector3d&, const Eigen::Vector3d&) {
    return cplx(0.0, 0.0);
  };
  CutoffSpec cs;
  cs.lambda = 5.0;
  QuadratureSpec qs;
  qs.method = QuadMethod::AdaptiveRadial;
  auto r = e2_quadrature(ks, cs, dp, 1, qs);
  CHECK(r.value == 0.0);
  CHECK(r.error_estimate <= qs.error_target);
}

TEST_CASE("cutoff growth of the second-order shift") {
  // at p = 1/2 the integral converges for d = 1 and grows like log(Lambda)
  // for d = 2; the d = 3 values grow linearly in Lambda
  DispersionParams dp;
  KernelSpec ks;
  ks.p = 0.5;
  CutoffSpec cs;
  cs.n = 1;

  const std::vector<double> lambdas{10, 30, 100, 300, 1000};
  const auto values_for = [&](int d, int res) {
    std::vector<double> vals;
    for (double lam : lambdas) {
      CutoffSpec c = cs;
      c.lambda = lam;
      QuadratureSpec qs;
      qs.method = QuadMethod::AdaptiveRadial;
      qs.resolution = res;
      qs.error_target = d == 1 ? 1e-6 : 1e-3;
      qs.max_evals = 200000000;
      vals.push_back(e2_quadrature(ks, c, dp, d, qs).value);
    }
    return vals;
  };
  // R^2 of a least-squares fit value = a + b log(lambda)
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
    const double mean = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
      const double fit = a + b * std::log(lambdas[i]);
      ss_res += (vals[i] - fit) * (vals[i] - fit);
      ss_tot += (vals[i] - mean) * (vals[i] - mean);
    }
    return 1.0 - ss_res / ss_tot;
  };

  SUBCASE("d = 1 converges") {
    auto v = values_for(1, 512);
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
      CHECK(std::abs(v[i + 1] - v[i]) < std::abs(v[i] - v[i - 1]));
    // remaining tail beyond the largest cutoff scales like 1/Lambda
    CHECK(std::abs(v.back() - v[v.size() - 2]) < 5e-3);
  }
  SUBCASE("d = 2 grows logarithmically") {
    auto v = values_for(2, 48);
    CHECK(log_fit_r2(v) > 0.99);
  }
  SUBCASE("d = 3 grows faster than logarithmically") {
    auto v = values_for(3, 16);
    // linear growth: successive differences scale with Lambda, and the
    // log fit cannot explain the trend
    CHECK(std::abs(v[4] - v[3]) > 2.0 * std::abs(v[3] - v[2]));
    CHECK(log_fit_r2(v) < 0.99);
  }
}

TEST_CASE("k-constant closed forms and properties") {
  DispersionParams dp;
  ModeGrid grid = build_grid(1, 0.5, 1);
  grid.centers[0] = Eigen::Vector3d::Zero();  // omega_a = omega_b = 1
  Eigen::MatrixXcd one = Eigen::MatrixXcd::Ones(1, 1);
  Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(1, 1);

  SUBCASE("first family") {
    CHECK(k1_constant(cplx(-3, 0), 1.0, zero, grid, 1.0, dp) == 0.0);
    // (1 / ((1+3)^(2*1-1) * 1))^(1/2) = 1/2
    CHECK(k1_constant(cplx(-3, 0), 1.0, one, grid, 1.0, dp) == doctest::Approx(0.5));
    CHECK(k1_constant(cplx(-9, 0), 1.0, one, grid, 1.0, dp) <
          k1_constant(cplx(-3, 0), 1.0, one, grid, 1.0, dp));
    CHECK_THROWS(k1_constant(cplx(-0.5, 0), 1.0, one, grid, 1.0, dp));
    CHECK_THROWS(k1_constant(cplx(-3, 0), 0.2, one, grid, 1.0, dp));
  }
  SUBCASE("second family") {
    CHECK(k2_constant(cplx(-1.5, 0), 1.0, zero, one, grid, 1.0, dp) == 0.0);
    // A^2 = 1/(1 * (1+1)^1) = 1/2 at |Re z| = 1... use z = -1 - eps
    const double v = k2_constant(cplx(-1.0000000001, 0), 1.0, one, one, grid, 1.0, dp);
    CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("third family") {
    const double v =
        k3_constant(cplx(-1.0000000001, 0), 1.0, one, one, one, grid, 1.0, dp);
    CHECK(v == doctest::Approx(std::pow(0.5, 1.5)).epsilon(1e-6));
    CHECK(k3_constant(cplx(-2, 0), 0.5, zero, one, one, grid, 1.0, dp) == 0.0);
  }
  SUBCASE("absolute homogeneity") {
    Eigen::MatrixXcd f = cplx(0.3, -0.4) * one;
    CHECK(k1_constant(cplx(-2, 0), 0.75, cplx(2.0, 0.0) * f, grid, 1.0, dp) ==
          doctest::Approx(2.0 * k1_constant(cplx(-2, 0), 0.75, f, grid, 1.0, dp)));
  }
}

TEST_CASE("uniformity of the first bound family in the cutoff") {
  // for feasible (d, p) the weighted kernel norm stabilizes as the cutoff
  // grows; continuum quadrature with the v = n(k+q) substitution (a fixed
  // discrete grid cannot resolve the concentrated factor at large cutoff)
  DispersionParams dp;
  const double p = 0.5, beta = 0.75, abs_re_z = 2.0;
  const auto k1_sq = [&](double lam) {
    const int nq = 40000, nv = 200;
    const double hq = 2.0 * lam / nq, hv = 2.0 / nv;
    double sum = 0.0;
    for (int iq = 0; iq < nq; ++iq) {
      const double q = -lam + (iq + 0.5) * hq;
      if (std::abs(q) > lam) continue;
      const double omega_a = std::sqrt(q * q + dp.m_b * dp.m_b);
      double inner = 0.0;
      for (int iv = 0; iv < nv; ++iv) {
        const double v = -1.0 + (iv + 0.5) * hv;
        const double k = v - q;  // n = 1
        if (std::abs(k) > lam) continue;
        const double f = std::abs(v) <= 1.0 ? 0.5 : 0.0;
        const double omega_b = std::sqrt(k * k + dp.m_f * dp.m_f);
        inner += f * f /
                 (std::pow(omega_b + abs_re_z, 2.0 * beta - 1.0) * omega_b) * hv;
      }
      sum += inner / std::pow(omega_a, 2.0 * p) * hq;
    }
    return sum;
  };
  std::vector<double> k1s;
  for (double lam : {10.0, 100.0, 1000.0}) k1s.push_back(std::sqrt(k1_sq(lam)));
  CHECK(std::abs(k1s[2] - k1s[1]) / k1s[2] < 0.05);
}

TEST_CASE("threshold calculator") {
  auto r1 = thresholds(1, 0.5);
  CHECK(r1.beta_min_k1 == doctest::Approx(0.0));
  CHECK(r1.beta_min_k2 == doctest::Approx(-1.0));
  CHECK(r1.beta_min_k3 == doctest::Approx(-2.0));
  CHECK(r1.scheme_feasible);

  auto r3 = thresholds(3, 0.5);
  CHECK(r3.beta_min_k1 == doctest::Approx(1.0));
  CHECK(!r3.scheme_feasible);

  CHECK(thresholds(3, 0.8).scheme_feasible);
  CHECK(!thresholds(3, 0.75).scheme_feasible);  // boundary is excluded
  CHECK(thresholds(2, 0.5).scheme_feasible);
  CHECK(!thresholds(2, 0.25).scheme_feasible);  // boundary p = d/2 - 3/4

  // dense (d, p) scan against the closed-form frontier
  for (int d = 1; d <= 3; ++d)
    for (int i = 0; i <= 100; ++i) {
      const double p = i * 0.02;
      CHECK(thresholds(d, p).scheme_feasible == (4.0 * p > 2.0 * d - 3.0));
    }
}
