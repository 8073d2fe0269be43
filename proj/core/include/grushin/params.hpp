#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace grushin {

enum class Regime { subcritical, critical, supercritical };

std::string_view to_string(Regime regime) noexcept;

/// Exact positive rational p/q, used to classify the critical case nβ = 2
/// without rounding.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Parses "3", "1.25", "2/3" exactly. Scientific notation and anything that
/// does not fit into 64-bit numerator/denominator is rejected.
Rational parse_rational(std::string_view text);

/// Dimensional parameters of the Grushin-type operator
///   -d²/dx² + C_β/x² + x^β Δ_M   on [0, x_max) × M,  dim M = n.
struct GrushinParams {
  int n = 1;
  double beta = 0.0;
  double c_beta = 0.0;  ///< (βn/4)(1 + βn/4)
  double d = 0.0;       ///< Hausdorff dimension n(1 + β/2)
  double l_cl = 0.0;    ///< (4π)^{-n/2} / Γ(1 + n/2)
  Regime regime = Regime::subcritical;

  /// ℓ with ℓ(ℓ+1) = C_β, i.e. βn/4.
  double centrifugal_index() const noexcept { return beta * n / 4.0; }
  /// Bessel order ν = ℓ + 1/2 of the μ = 0 fibre.
  double bessel_order() const noexcept { return centrifugal_index() + 0.5; }
  /// Exponent p of the one-term growth λ_k(P_1) ~ c k^p.
  double growth_exponent() const noexcept { return 2.0 * beta / (beta + 2.0); }
  bool supercritical() const noexcept { return regime == Regime::supercritical; }
};

GrushinParams derive_params(int n, double beta);
GrushinParams derive_params(int n, Rational beta);

/// Gas-planet parametrisation g = u^{-α}(du² + g_0), mapped to the Grushin
/// normal form with β = 2α/(2-α).
struct GasPlanetParams {
  double alpha = 0.0;
  GrushinParams grushin;
  double rate_exponent = 0.0;  ///< 1/(2-α): concentration at scale λ^{-1/(2-α)}
  /// α ∈ (2/(n+1), 2), equivalently β > 2/n.
  bool concentration_theorem_applies() const noexcept { return grushin.supercritical(); }
};

double beta_from_alpha(double alpha);
double alpha_from_beta(double beta);
GasPlanetParams gas_planet_params(int n, double alpha);

/// x = (1-α/2)^{-1} u^{1-α/2}
double map_u_to_x(double u, double alpha);
/// u = ((1-α/2) x)^{2/(2-α)}
double map_x_to_u(double x, double alpha);

}  // namespace grushin
