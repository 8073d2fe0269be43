#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "grushin/error.hpp"
#include "grushin/profile.hpp"
#include "oracles.hpp"

using namespace grushin;
using grushin::testing::profile_n1_beta3;
using grushin::testing::reference_n1_beta3;
using grushin::testing::rel;

namespace {

// Σ_{k≥0} (4k+5)^{-2} with an Euler–Maclaurin tail; independent of the solver.
double harmonic_oracle_zeta() {
  double sum = 0.0;
  const int K = 100000;
  for (int k = 0; k < K; ++k) sum += 1.0 / ((4.0 * k + 5) * (4.0 * k + 5));
  const double a = 4.0 * K + 5;
  return sum + 1.0 / (4.0 * a) + 0.5 / (a * a);
}

}  // namespace

TEST_CASE("zeta oracle for the two-dimensional harmonic case") {
  const double oracle = harmonic_oracle_zeta();
  // trigamma(5/4)/16
  CHECK(oracle == doctest::Approx(0.0748331).epsilon(1e-6));
  const auto ref = reference_spectrum(derive_params(2, 2.0), 200, 1e-8);
  const auto z = spectral_zeta(ref, 2.0);
  CHECK(rel(z.value, oracle) < 1e-4);
  const auto w = weyl_constant(ref);
  CHECK(rel(w.value, oracle / (4 * M_PI)) < 1e-4);

  auto doubled = z;
  doubled.value *= 2.0;
  CHECK(weyl_constant(ref.params, doubled).value == doctest::Approx(2.0 * w.value));
}

TEST_CASE("zeta is rejected outside the supercritical regime") {
  const auto crit = reference_spectrum(derive_params(1, 2.0), 20, 1e-8);
  try {
    spectral_zeta(crit, crit.params.d / 2.0);
    FAIL("expected a regime error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::regime);
  }
  const auto& ref = reference_n1_beta3();
  CHECK(spectral_zeta(ref, ref.params.d / 2.0).value > 0.0);
}

TEST_CASE("zeta tail estimate shrinks as more eigenvalues are used") {
  const auto& ref = reference_n1_beta3();
  const double e = ref.params.d / 2.0;
  const auto z50 = spectral_zeta(ref, e, 50);
  const auto z100 = spectral_zeta(ref, e, 100);
  const auto z200 = spectral_zeta(ref, e, 200);
  CHECK(z100.tail_estimate < z50.tail_estimate);
  CHECK(z200.tail_estimate < z100.tail_estimate);
  CHECK(rel(z50.value, z200.value) < 1e-3);
  CHECK(z200.value == doctest::Approx(0.334695).epsilon(1e-5));
}

TEST_CASE("profile B basic properties") {
  const auto& b = profile_n1_beta3();
  CHECK(b.values.front() == 0.0);
  CHECK(std::all_of(b.values.begin(), b.values.end(), [](double v) { return v >= 0.0; }));
  CHECK(std::abs(profile_integral(b) - 1.0) <= 1e-2);
  CHECK(b.normalization_defect <= b.defect_bound);
  CHECK(b.vanishing_order > 1.0);
  CHECK(profile_pairing(b, Potential::exponential(1, 1)) == doctest::Approx(0.0228673).epsilon(1e-5));
}

TEST_CASE("per-eigenvalue mass") {
  // Each term of the quantum sum integrates over x to λ_k^{-d/2}/ζ, because
  // ∫|φ(t x)|² dx = 1/t.
  const auto& ref = reference_n1_beta3();
  const double e = ref.params.d / 2.0;
  ProfileQuadrature q;
  q.k_used = 20;
  q.semiclassical_remainder = false;
  const auto b = compute_profile_B(ref, default_profile_grid(ref), q);
  double partial = 0.0;
  for (std::size_t k = 1; k <= 20; ++k) partial += std::pow(ref.lambda(k), -e);
  const double zeta = spectral_zeta(ref, e, 20).value;
  CHECK(rel(profile_integral(b), partial / zeta) < 1e-3);
}

TEST_CASE("t-quadrature stability") {
  const auto& ref = reference_n1_beta3();
  const auto& b = profile_n1_beta3();
  ProfileQuadrature fine;
  fine.t_points = 512;
  fine.workers = 2;
  const auto b2 = compute_profile_B(ref, b.abscissae, fine);
  double sup = 0.0;
  for (std::size_t i = 0; i < b.values.size(); ++i) sup = std::max(sup, std::abs(b.values[i] - b2.values[i]));
  CHECK(sup < 1e-3);
}

TEST_CASE("k-truncation stability of the quantum part") {
  const auto& ref = reference_n1_beta3();
  const auto grid = default_profile_grid(ref);
  ProfileQuadrature q100, q200;
  q100.k_used = 100;
  q100.semiclassical_remainder = false;
  q200.k_used = 200;
  q200.semiclassical_remainder = false;
  const auto b100 = compute_profile_B(ref, grid, q100);
  const auto b200 = compute_profile_B(ref, grid, q200);
  const double zeta = spectral_zeta(ref, ref.params.d / 2.0).value;
  CHECK(std::abs(profile_integral(b200) - profile_integral(b100)) < b100.zeta_tail_estimate / zeta);
}

TEST_CASE("parallel profile evaluation is bit-identical") {
  const auto& ref = reference_n1_beta3();
  const auto& b = profile_n1_beta3();
  ProfileQuadrature q;
  q.workers = 8;
  CHECK(compute_profile_B(ref, b.abscissae, q).values == b.values);
}

TEST_CASE("gas-planet profile A") {
  const auto& b = profile_n1_beta3();
  const double alpha = alpha_from_beta(3.0);
  const auto a = compute_profile_A(b, alpha);
  CHECK(std::abs(profile_integral(a) - 1.0) <= 2e-2);
  CHECK(std::abs(profile_integral(a) - 1.0) <= 2.0 * std::max(b.normalization_defect, 1e-3));
  CHECK(back_substitution_error(a, b) < 1e-2);
  CHECK(std::all_of(a.values.begin(), a.values.end(), [](double v) { return v >= 0.0; }));
  for (std::size_t i = 37; i < a.abscissae.size(); i += 37) {
    const double u = a.abscissae[i];
    CHECK(a.values[i] == doctest::Approx(b.values[i] * std::pow(u, -alpha / 2.0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(compute_profile_A(b, 1.0), Error);
}

TEST_CASE("alpha = 1 substitution spot value") {
  // β = 2 is critical for n = 1, so use n = 2 where α = 1 is supercritical
  const auto ref = reference_spectrum(derive_params(2, 2.0), 60, 1e-8);
  const auto b = compute_profile_B(ref, default_profile_grid(ref));
  const auto a = compute_profile_A(b, 1.0);
  CHECK(profile_value(a, 0.25) == doctest::Approx(2.0 * profile_value(b, 1.0)).epsilon(2e-3));
}

TEST_CASE("quantiles") {
  const auto& b = profile_n1_beta3();
  CHECK(profile_quantile(b, 0.0) == 0.0);
  CHECK(profile_quantile(b, 1.0) == b.abscissae.back());
  CHECK(profile_quantile(b, 0.5) <= profile_quantile(b, 0.95));
  CHECK_THROWS_AS(profile_quantile(b, 1.5), Error);
}

TEST_CASE("profile CSV header") {
  const auto& b = profile_n1_beta3();
  const std::string csv = profile_csv(b);
  CHECK(csv.rfind("# kind=B n=1 beta=3 k_used=200 defect=", 0) == 0);
  CHECK(csv.find("\nx,value\n") != std::string::npos);
}
