#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "grushin/error.hpp"
#include "grushin/scaling.hpp"
#include "grushin/serialize.hpp"
#include "oracles.hpp"

using namespace grushin;
using grushin::testing::reference_n1_beta3;
using grushin::testing::rel;

TEST_CASE("reference spectra reproduce the Calogero oracle") {
  const auto r1 = reference_spectrum(derive_params(1, 2.0), 3, 1e-8);
  CHECK(rel(r1.lambda(1), 4.0) < 1e-3);
  CHECK(rel(r1.lambda(2), 8.0) < 1e-3);
  CHECK(rel(r1.lambda(3), 12.0) < 1e-3);
  const auto r2 = reference_spectrum(derive_params(2, 2.0), 3, 1e-8);
  CHECK(rel(r2.lambda(1), 5.0) < 1e-3);
  CHECK(rel(r2.lambda(2), 9.0) < 1e-3);
  CHECK(rel(r2.lambda(3), 13.0) < 1e-3);
  CHECK(scaled_eigenvalue(r1, 1, 16.0) == doctest::Approx(16.0).epsilon(1e-3));
  CHECK(cutoff_S(r1, 1.0) == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("reference spectrum is certified and strictly ascending") {
  const auto& ref = reference_n1_beta3();
  REQUIRE(ref.size() == 200);
  for (std::size_t k = 1; k < ref.size(); ++k) CHECK(ref.eigenvalues[k] > ref.eigenvalues[k - 1]);
  for (double g : ref.dn_gap) CHECK(g <= ref.certificate_tol);
  CHECK(ref.lambda(1) == doctest::Approx(5.48372).epsilon(1e-5));
  CHECK(scaled_eigenvalue(ref, 7, 1.0) == ref.lambda(7));
}

TEST_CASE("scaling covariance against direct solves") {
  const auto& ref = reference_n1_beta3();
  const auto p = ref.params;
  for (double mu : {0.1, 1.0, 10.0, 100.0}) {
    const double x_max = ref.x_max() * std::pow(mu, -1.0 / (2.0 + p.beta));
    const auto r = solve_with_refinement(model_potential(p, mu), x_max, BoundaryCondition::dirichlet, 10, 1e-6);
    for (std::size_t k = 1; k <= 10; ++k) CHECK(rel(r.eigenvalues[k - 1], scaled_eigenvalue(ref, k, mu)) < 1e-3);
  }
}

TEST_CASE("eigenfunction scaling") {
  const auto& ref = reference_n1_beta3();
  const auto p = ref.params;
  for (double mu : {4.0, 16.0}) {
    const double x_max = ref.x_max() * std::pow(mu, -1.0 / (2.0 + p.beta));
    const Grid1D g(x_max, 4000);
    const auto t = discretize(model_potential(p, mu), g, BoundaryCondition::dirichlet);
    const auto lam = lowest_eigenvalues(t, 3, default_tolerance(t));
    for (std::size_t k = 1; k <= 3; ++k) {
      auto v = eigenfunction(t, lam[k - 1]);
      const double a = std::pow(mu, 1.0 / (2.0 + p.beta));
      double diff = 0.0;
      for (std::size_t i = 0; i < g.n_points; ++i) {
        const double w = std::sqrt(a) * ref.eigenfunction_value(k, a * g.node(i));
        diff += g.spacing() * (v[i] - w) * (v[i] - w);
      }
      CHECK(std::sqrt(diff) < 1e-2);
    }
  }
}

TEST_CASE("n_s is a non-increasing step function vanishing past the cutoff") {
  const auto& ref = reference_n1_beta3();
  const double s_cut = cutoff_S(ref, 1.0);
  CHECK(cutoff_S(ref, 4.0) == doctest::Approx(std::pow(4.0, ref.params.d / 2.0) * s_cut));
  CHECK(n_s(ref, 1.0, s_cut * (1 + 1e-9)).count == 0);
  CHECK(n_s(ref, 1.0, s_cut * (1 - 1e-3)).count >= 1);

  std::size_t prev = SIZE_MAX;
  double envelope = 0.0;
  for (int i = 40; i >= 0; --i) {
    const double s = s_cut * std::pow(10.0, -3.0 * i / 40.0 + 0.1);
    const auto c = n_s(ref, 1.0, s);
    REQUIRE_FALSE(c.inconclusive);
    CHECK(c.count <= prev);
    prev = c.count;
    if (s < s_cut) envelope = std::max(envelope, c.count * std::pow(s, 2.0 / (ref.params.n * ref.params.beta)));
  }
  // n_s(1, s)·s^{2/(nβ)} stays bounded as s → 0
  CHECK(envelope < 10.0);
  // a scale so small that all K eigenpairs fit is flagged
  CHECK(n_s(ref, 1.0, 1e-12).inconclusive);
}

TEST_CASE("turning points and WKB estimate") {
  const auto p = derive_params(1, 2.0);
  for (std::size_t k = 1; k <= 5; ++k) CHECK(wkb_eigenvalue(p, 1.0, k) == doctest::Approx(4.0 * k).epsilon(1e-6));
  const auto tp = turning_points(derive_params(1, 3.0), 1.0, 50.0);
  REQUIRE(tp.has_value());
  CHECK(tp->first < tp->second);
  CHECK_FALSE(turning_points(derive_params(1, 3.0), 1.0, 0.1).has_value());
}

TEST_CASE("reference spectrum JSON round trip and cache") {
  const auto ref = reference_spectrum(derive_params(1, 3.0), 10, 1e-8);
  const auto back = reference_from_json(ordered_json::parse(emit_json(to_json(ref))));
  CHECK(back.eigenvalues == ref.eigenvalues);
  CHECK(back.eigenfunctions == ref.eigenfunctions);
  CHECK(back.grid.n_points == ref.grid.n_points);

  const auto dir = std::filesystem::temp_directory_path() / "grushin_cache_test";
  std::filesystem::remove_all(dir);
  const auto first = cached_reference_spectrum(ref.params, 10, 1e-8, dir);
  const auto second = cached_reference_spectrum(ref.params, 10, 1e-8, dir);
  CHECK(first.eigenvalues == second.eigenvalues);
  CHECK(std::distance(std::filesystem::directory_iterator(dir), {}) == 1);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(reference_from_json(ordered_json::parse("{\"k_max\": 3}")), Error);
}

TEST_CASE("reference spectra are identical for any worker count") {
  ReferenceOptions one, many;
  many.workers = 4;
  const auto a = reference_spectrum(derive_params(1, 3.0), 30, 1e-8, one);
  const auto b = reference_spectrum(derive_params(1, 3.0), 30, 1e-8, many);
  CHECK(emit_json(to_json(a)) == emit_json(to_json(b)));
}
