#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grushin/params.hpp"
#include "grushin/potential.hpp"
#include "grushin/serialize.hpp"
#include "grushin/sturm1d.hpp"

namespace grushin {

/// First K half-line eigenpairs of P_1 = −∂² + C_β/x² + x^β (Dirichlet at 0),
/// certified by Dirichlet/Neumann agreement at the truncation point.
struct ReferenceSpectrum {
  GrushinParams params;
  std::vector<double> eigenvalues;                   ///< Richardson-extrapolated, ascending
  std::vector<std::vector<double>> eigenfunctions;   ///< on `grid`, h·Σφ² = 1
  Grid1D grid;                                       ///< fine grid carrying the eigenfunctions
  std::vector<double> dn_gap;                        ///< relative Dirichlet/Neumann gap per k
  double certificate_tol = 0.0;
  double discretization_error = 0.0;                 ///< relative Richardson discrepancy
  std::size_t k_max = 0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  double x_max() const noexcept { return grid.x_max; }
  double lambda(std::size_t k) const;  ///< 1-based
  /// φ_k^{(1)}(x) by linear interpolation, zero at 0 and beyond x_max (k 1-based).
  double eigenfunction_value(std::size_t k, double x) const;
};

struct ReferenceOptions {
  double nodes_per_wavelength = 20.0;
  double turning_fraction = 0.6;  ///< turning point of λ_K sits at this fraction of x_max
  double growth = 1.25;           ///< x_max ratio between truncation candidates
  int max_candidates = 6;
  std::size_t max_points = std::size_t{1} << 21;
  bool with_eigenfunctions = true;
  unsigned workers = 1;
};

ReferenceSpectrum reference_spectrum(const GrushinParams& params, std::size_t k_max, double certificate_tol = 1e-8,
                                     const ReferenceOptions& options = {});

/// μ^{2/(2+β)} λ_k(P_1), k 1-based.
double scaled_eigenvalue(const ReferenceSpectrum& ref, std::size_t k, double mu);

struct CountResult {
  std::size_t count = 0;
  bool inconclusive = false;  ///< count reached K; more eigenpairs are needed
};

/// #{k ≤ K : s^{2/d} λ_k < kappa}
CountResult n_s(const ReferenceSpectrum& ref, double kappa, double s);

/// (kappa/λ_1)^{d/2}: beyond it P_{s^{2/n}} has no eigenvalue below kappa.
double cutoff_S(const ReferenceSpectrum& ref, double kappa);

ordered_json to_json(const ReferenceSpectrum& ref);
ReferenceSpectrum reference_from_json(const ordered_json& doc);

/// Loads `<dir>/<key>.json` when its (n, β, k_max, certificate_tol) match,
/// otherwise computes and stores it. An empty dir disables caching.
ReferenceSpectrum cached_reference_spectrum(const GrushinParams& params, std::size_t k_max, double certificate_tol,
                                            const std::filesystem::path& cache_dir,
                                            const ReferenceOptions& options = {});

// ---------------------------------------------------------------------------
// Direct half-line solves of P_μ + V (used by scaling checks, trace
// functionals and Hellmann–Feynman).

PotentialSpec model_potential(const GrushinParams& params, double mu, const std::optional<Potential>& extra = {});

/// Turning points of (ℓ+½)²/x² + μx^β = E (Langer-corrected); nullopt if E is
/// below the minimum.
std::optional<std::pair<double, double>> turning_points(const GrushinParams& params, double mu, double energy);

/// WKB estimate of the k-th eigenvalue of P_μ (k 1-based), exact for β = 2.
double wkb_eigenvalue(const GrushinParams& params, double mu, std::size_t k);

/// Smallest x past the outer turning point of `energy` where the Agmon action
/// ∫√(q − energy) reaches `depth`.
double agmon_cut(const GrushinParams& params, double mu, double energy, double depth);

struct HalfLineOptions {
  double nodes_per_wavelength = 40.0;
  double agmon_depth = 18.0;
  std::size_t min_points = 400;
  std::size_t max_points = std::size_t{1} << 22;
};

/// P_μ + V on [0, x_cut] with x_cut from the Agmon rule at energy
/// kappa − min(0, inf V), resolved for energies up to that value.
Grid1D half_line_grid(const GrushinParams& params, double mu, const std::optional<Potential>& extra, double kappa,
                      const HalfLineOptions& options = {});

}  // namespace grushin
