#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grushin/params.hpp"
#include "grushin/potential.hpp"
#include "grushin/scaling.hpp"
#include "grushin/serialize.hpp"

namespace grushin {

/// Σ_k λ_k^{-e} with an integral tail from the growth law λ_k^{1/p} ≈ a(k + δ),
/// p = 2β/(β+2), fitted on the last decade of retained eigenvalues.
struct ZetaValue {
  double value = 0.0;
  double partial_sum = 0.0;
  double tail_estimate = 0.0;
  double exponent = 0.0;
  double growth_exponent = 0.0;  ///< p
  double fit_slope = 0.0;        ///< a
  double fit_offset = 0.0;       ///< δ
  std::size_t k_used = 0;
};

ZetaValue spectral_zeta(const ReferenceSpectrum& ref, double exponent, std::size_t k_used = 0);

struct WeylConstant {
  double value = 0.0;  ///< l_cl · zeta_value
  double zeta_value = 0.0;
  std::size_t k_used = 0;
  double tail_estimate = 0.0;
};

WeylConstant weyl_constant(const ReferenceSpectrum& ref);
WeylConstant weyl_constant(const GrushinParams& params, const ZetaValue& zeta);

enum class ProfileKind { B_of_x, A_of_u };

struct BoundaryProfile {
  std::vector<double> abscissae;
  std::vector<double> values;
  ProfileKind kind = ProfileKind::B_of_x;
  GrushinParams params;
  std::optional<double> alpha;
  double normalization_defect = 0.0;  ///< |∫ − 1|
  double defect_bound = 1e-2;
  std::size_t k_used = 0;
  double zeta_tail_estimate = 0.0;
  double tail_mass = 0.0;      ///< analytic mass beyond the last abscissa
  double tail_exponent = 0.0;  ///< values decay like abscissa^{-tail_exponent}
  double vanishing_order = 0.0;
  double reliable_support = 0.0;  ///< λ_1^{-1/2}·x_max(ref), mapped for A
  bool support_warning = false;   ///< grid extends past reliable_support
};

struct ProfileQuadrature {
  std::size_t t_points = 256;
  std::size_t k_used = 0;  ///< 0: all retained eigenpairs
  bool semiclassical_remainder = true;
  unsigned workers = 1;
};

/// 400 uniform points on [0, 1.2·λ_1^{-1/2}·x_ref] followed by 240 geometric
/// points out to 1e4 times that.
std::vector<double> default_profile_grid(const ReferenceSpectrum& ref);

BoundaryProfile compute_profile_B(const ReferenceSpectrum& ref, std::span<const double> x_grid,
                                  const ProfileQuadrature& quad = {});

/// A(u) = B(x(u))·u^{-α/2} on the mapped grid.
BoundaryProfile compute_profile_A(const BoundaryProfile& b, double alpha);

/// Trapezoid integral plus the analytic tail.
double profile_integral(const BoundaryProfile& p);
/// ∫ P·f, same rule (the tail uses f at the last abscissa).
double profile_pairing(const BoundaryProfile& p, const Potential& f);
/// Linear interpolation, 0 past the last abscissa.
double profile_value(const BoundaryProfile& p, double abscissa);
double profile_quantile(const BoundaryProfile& p, double fraction);

/// Relative L¹ distance between B and the back-substituted A(u(x))·u(x)^{α/2},
/// sampled at the midpoints of B's grid.
double back_substitution_error(const BoundaryProfile& a, const BoundaryProfile& b);

std::string profile_csv(const BoundaryProfile& p);
ordered_json to_json(const BoundaryProfile& p);

}  // namespace grushin
