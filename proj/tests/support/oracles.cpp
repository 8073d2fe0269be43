#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace grushin::testing {

double bessel_j_series(double nu, double x) {
  const double half = 0.5 * x;
  double term = std::pow(half, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= -half * half / (m * (m + nu));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double first_bessel_zero(double nu) {
  double a = 1e-3, step = 1e-2;
  double fa = bessel_j_series(nu, a);
  for (double b = a + step; b < 40.0; a = b, b += step) {
    const double fb = bessel_j_series(nu, b);
    if (fa * fb < 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = bessel_j_series(nu, m);
        (fa * fm <= 0.0 ? b : a) = m;
        if (fa * fm > 0.0) fa = fm;
      }
      return 0.5 * (a + b);
    }
    fa = fb;
  }
  throw std::runtime_error("no Bessel zero found");
}

TridiagonalOperator random_jacobi(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> diag(n), off(n > 0 ? n - 1 : 0);
  for (auto& d : diag) d = u(rng);
  for (auto& e : off) e = u(rng);
  return make_jacobi(std::move(diag), std::move(off));
}

const ReferenceSpectrum& reference_n1_beta3() {
  static const ReferenceSpectrum ref = reference_spectrum(derive_params(1, 3.0), 200, 1e-8);
  return ref;
}

const BoundaryProfile& profile_n1_beta3() {
  static const BoundaryProfile b = [] {
    const auto& ref = reference_n1_beta3();
    return compute_profile_B(ref, default_profile_grid(ref));
  }();
  return b;
}

}  // namespace grushin::testing
