#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "grushin/error.hpp"
#include "grushin/scaling.hpp"
#include "grushin/sturm1d.hpp"
#include "oracles.hpp"

using namespace grushin;
using grushin::testing::rel;

namespace {

TridiagonalOperator small() { return make_jacobi({2, 2, 2}, {-1, -1}); }

}  // namespace

TEST_CASE("stencil assembly") {
  const Grid1D g(4.0, 3);  // h = 1
  const auto free = discretize(PotentialSpec{}, g, BoundaryCondition::dirichlet);
  CHECK(free.diagonal == std::vector<double>{2, 2, 2});
  CHECK(free.offdiagonal == std::vector<double>{-1, -1});

  const auto inv = discretize(PotentialSpec{0.75, 0.0, 2.0, {}}, g, BoundaryCondition::dirichlet);
  CHECK(inv.diagonal[0] == doctest::Approx(2.75));
  CHECK(inv.diagonal[1] == doctest::Approx(2.0 + 0.75 / 4));
  CHECK(inv.diagonal[2] == doctest::Approx(2.0 + 0.75 / 9));

  const auto neu = discretize(PotentialSpec{}, Grid1D(3.0, 2), BoundaryCondition::neumann);
  CHECK(neu.diagonal == std::vector<double>{2, 1});
  CHECK(neu.offdiagonal == std::vector<double>{-1});
}

TEST_CASE("Sturm counts, eigenvalues and traces of the 3x3 example") {
  const auto t = small();
  CHECK(count_below(t, 2.0) == 1);
  CHECK(count_below(t, 0.0) == 0);
  CHECK(count_below(t, 4.0) == 3);

  const auto r = eigenvalues_below(t, 4.0, 1e-10);
  REQUIRE(r.eigenvalues.size() == 3);
  CHECK(r.eigenvalues[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-10));
  CHECK(r.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.eigenvalues[2] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-10));
  CHECK(eigenvalues_below(t, 0.5, 1e-10).eigenvalues.empty());

  CHECK(trace_neg(t, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(trace_neg(t, 0.0) == 0.0);
  CHECK(trace_neg(t, 10.0) == doctest::Approx(24.0).epsilon(1e-12));
}

TEST_CASE("bisection tolerance below rounding is rejected") {
  CHECK_THROWS_AS(eigenvalues_below(small(), 4.0, 1e-20), Error);
}

TEST_CASE("property: random Jacobi matrices") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = testing::random_jacobi(rng, size(rng));
    const auto [lo, hi] = t.spectral_bounds();
    const double kappa = std::uniform_real_distribution<double>(lo, hi)(rng);
    const auto r = eigenvalues_below(t, kappa, 1e-9);
    CHECK(r.eigenvalues.size() == count_below(t, kappa));
    CHECK(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));

    // trace invariants of the full spectrum
    const auto all = eigenvalues_below(t, hi + 1.0, 1e-11).eigenvalues;
    REQUIRE(all.size() == t.size());
    double tr = 0.0, tr_all = 0.0, fro = 0.0, sq = 0.0;
    for (double d : t.diagonal) tr += d, fro += d * d;
    for (double e : t.offdiagonal) fro += 2.0 * e * e;
    for (double l : all) tr_all += l, sq += l * l;
    CHECK(tr_all == doctest::Approx(tr).epsilon(1e-9).scale(10.0));
    CHECK(sq == doctest::Approx(fro).epsilon(1e-9));

    // counts are non-decreasing integer steps reaching N
    std::size_t prev = 0;
    for (int i = 0; i <= 50; ++i) {
      const std::size_t c = count_below(t, lo - 1.0 + (hi - lo + 2.0) * i / 50.0);
      CHECK(c >= prev);
      prev = c;
    }
    CHECK(count_below(t, hi + 1.0) == t.size());
    CHECK(count_below(t, lo - 1.0) == 0);
  }
}

TEST_CASE("free Laplacian eigenvectors are sines") {
  const std::size_t n = 2000;
  const Grid1D g(1.0, n);
  const auto t = discretize(PotentialSpec{}, g, BoundaryCondition::dirichlet);
  const auto lam = lowest_eigenvalues(t, 5, default_tolerance(t));
  std::vector<std::vector<double>> vs;
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto v = eigenfunction(t, lam[k - 1]);
    const double h = g.spacing();
    double norm = 0.0, overlap = 0.0, sine_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(k * M_PI * g.node(i));
      norm += h * v[i] * v[i];
      overlap += h * v[i] * s;
      sine_norm += h * s * s;
    }
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(overlap) / std::sqrt(sine_norm) > 1.0 - 1e-6);
    vs.push_back(v);
  }
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a + 1; b < 5; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += g.spacing() * vs[a][i] * vs[b][i];
      CHECK(std::abs(dot) < 1e-8);
    }
}

TEST_CASE("Calogero oracle spectra") {
  const auto p1 = derive_params(1, 2.0);
  const auto r1 = solve_with_refinement(model_potential(p1, 1.0), 12.0, BoundaryCondition::dirichlet, 5, 1e-5);
  const double want1[] = {4, 8, 12, 16, 20};
  for (int k = 0; k < 5; ++k) CHECK(rel(r1.eigenvalues[k], want1[k]) < 1e-3);
  CHECK(r1.converged);

  const auto p2 = derive_params(2, 2.0);
  const auto r2 = solve_with_refinement(model_potential(p2, 1.0), 12.0, BoundaryCondition::dirichlet, 3, 1e-5);
  const double want2[] = {5, 9, 13};
  for (int k = 0; k < 3; ++k) CHECK(rel(r2.eigenvalues[k], want2[k]) < 1e-3);
}

TEST_CASE("inverse-square box matches the Bessel zero") {
  const double nu = derive_params(1, 3.0).bessel_order();
  const double j = testing::first_bessel_zero(nu);
  // first zero of J_{5/4}, cross-checked against an independent library
  CHECK(j == doctest::Approx(4.165426284472).epsilon(1e-9));
  const auto r = solve_with_refinement(PotentialSpec{1.3125, 0.0, 3.0, {}}, 1.0, BoundaryCondition::dirichlet, 1, 1e-7);
  CHECK(rel(r.eigenvalues[0], j * j) < 1e-5);
}

TEST_CASE("second-order convergence of the ground state") {
  const auto pot = model_potential(derive_params(1, 2.0), 1.0);
  double prev_err = 0.0;
  Grid1D g(12.0, 400);
  for (int level = 0; level < 4; ++level, g = g.refined()) {
    const auto t = discretize(pot, g, BoundaryCondition::dirichlet);
    const double err = std::abs(lowest_eigenvalues(t, 1, default_tolerance(t))[0] - 4.0);
    if (level > 0) {
      const double ratio = prev_err / err;
      CHECK(ratio >= 3.0);
      CHECK(ratio <= 5.0);
    }
    prev_err = err;
  }
}

TEST_CASE("property: monotone in mu and Dirichlet/Neumann bracketing") {
  const auto p = derive_params(1, 3.0);
  const Grid1D g(6.0, 1500);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mu_dist(0.0, 20.0);
  for (int trial = 0; trial < 8; ++trial) {
    double mu_a = mu_dist(rng), mu_b = mu_dist(rng);
    if (mu_a > mu_b) std::swap(mu_a, mu_b);
    const auto ta = discretize(model_potential(p, mu_a), g, BoundaryCondition::dirichlet);
    const auto tb = discretize(model_potential(p, mu_b), g, BoundaryCondition::dirichlet);
    const auto tn = discretize(model_potential(p, mu_a), g, BoundaryCondition::neumann);
    const auto la = lowest_eigenvalues(ta, 10, default_tolerance(ta));
    const auto lb = lowest_eigenvalues(tb, 10, default_tolerance(tb));
    const auto ln = lowest_eigenvalues(tn, 10, default_tolerance(tn));
    for (int k = 0; k < 10; ++k) {
      CHECK(lb[k] >= la[k]);
      CHECK(ln[k] <= la[k]);
    }
  }
}

TEST_CASE("eigenfunction rejects a near-degenerate target") {
  // two decoupled identical blocks: every eigenvalue is double
  const auto t = make_jacobi({2, 2, 2, 2}, {-1, 0, -1});
  CHECK_THROWS_AS(eigenfunction(t, 1.0, 1e-10), Error);
}
