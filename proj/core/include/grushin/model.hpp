#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grushin/cross_spectrum.hpp"
#include "grushin/params.hpp"
#include "grushin/potential.hpp"
#include "grushin/profile.hpp"
#include "grushin/scaling.hpp"
#include "grushin/serialize.hpp"
#include "grushin/sturm1d.hpp"

namespace grushin {

struct GridPolicy {
  double nodes_per_wavelength = 40.0;
  /// Modes are truncated (Dirichlet) where the Agmon action past the turning
  /// point of the target energy reaches this depth.
  double agmon_depth = 18.0;
  std::size_t max_points = std::size_t{1} << 22;
};

/// ⊕_j P_{μ_j} on [0, x_max] × M, one fibre per distinct cross eigenvalue.
struct ModelOperator {
  GrushinParams params;
  CrossSpectrum cross;
  double x_max = 1.0;
  BoundaryCondition right_bc = BoundaryCondition::dirichlet;
  GridPolicy grid;
  unsigned workers = 1;

  ModelOperator(GrushinParams params, CrossSpectrum cross, double x_max,
                BoundaryCondition right_bc = BoundaryCondition::dirichlet, GridPolicy grid = {}, unsigned workers = 1);
};

/// 1.25 × the classical turning point (λ_max/μ_1)^{1/β} of the lowest nonzero
/// cross mode.
double auto_strip_width(const GrushinParams& params, const CrossSpectrum& cross, double lambda_max);

/// min_x (C_β/x² + μx^β), the lower bound used to discard whole modes.
double mode_floor(const GrushinParams& params, double mu);
/// Smallest μ whose mode floor reaches lambda_max; closed-form cross spectra
/// must extend past it for a complete table.
double required_mu_max(const GrushinParams& params, double lambda_max);

struct EigenEntry {
  std::size_t j = 0;  ///< cross entry index (0-based, ascending μ)
  std::size_t k = 0;  ///< longitudinal index, 1-based
  double lambda = 0.0;
  int multiplicity = 1;
  friend bool operator==(const EigenEntry&, const EigenEntry&) = default;
};

struct ModeGrid {
  std::size_t j = 0;
  double mu = 0.0;
  Grid1D grid;
  BoundaryCondition right_bc = BoundaryCondition::dirichlet;
};

struct EigenTable {
  std::vector<EigenEntry> entries;  ///< sorted by (j, k)
  std::vector<ModeGrid> modes;      ///< modes[j] for every j appearing in entries
  double lambda_max = 0.0;
  double spacing = 0.0;             ///< common h of every mode grid
  std::vector<std::vector<double>> vectors;  ///< parallel to entries when requested

  bool with_vectors() const noexcept { return !vectors.empty() || entries.empty(); }
};

EigenTable assemble_spectrum(const ModelOperator& model, double lambda_max, bool want_vectors = false);

/// Σ multiplicities with eigenvalue ≤ lambda.
long long counting_function(const EigenTable& table, double lambda);

struct WeylFit {
  double exponent = 0.0;
  double constant = 0.0;
  double exponent_stderr = 0.0;
  std::vector<double> lambdas;
  std::vector<double> counts;
  std::vector<double> residuals;  ///< log N − fitted line
};

WeylFit weyl_fit(const EigenTable& table, std::span<const double> lambdas);
WeylFit weyl_fit(std::span<const double> lambdas, std::span<const double> counts);

/// Σ mult·(lambda − λ_i)₊
double riesz_mean(const EigenTable& table, double lambda);
/// ∫_0^lambda N(t) dt summed step by step.
double counting_integral(const EigenTable& table, double lambda);

/// Tr(Δ + V_λ − λ)₋ with V_λ(x) = λV(√λ x), solved mode by mode.
double trace_with_potential(const ModelOperator& model, double lambda, const Potential& v);

struct Lemma1Config {
  std::size_t octaves = 4;  ///< 8-point Gauss–Legendre panels [T'/2^{i+1}, T'/2^i]
  double rel_tol = 1e-3;    ///< allowed change under panel doubling
  HalfLineOptions half_line{};
  unsigned workers = 1;
};

struct Lemma1Result {
  double value = 0.0;           ///< l_cl·v·∫ Tr(P_{s^{2/n}} + V − 1)₋ ds
  double closed_form = 0.0;     ///< constant-tail part, exact by scaling
  double correction = 0.0;      ///< quadrature of the decaying part
  double quadrature_change = 0.0;
  double t_upper = 0.0;
  std::size_t nodes = 0;
};

Lemma1Result lemma1_rhs(const ReferenceSpectrum& ref, double cross_volume, const Potential& v,
                        const Lemma1Config& config = {});

/// Separable cross potential: a constant, or cos(2π m y/L) in the first
/// circle/torus coordinate.
struct CrossPotential {
  enum class Kind { constant, cosine };
  Kind kind = Kind::constant;
  double c = 1.0;
  int m = 0;

  static CrossPotential parse(std::string_view descriptor);
  std::string describe() const;
};

/// v_G^{-1} ∫_M V2, which is also the exact cross factor of every
/// (degenerate) mode on circle and torus.
double cross_average(const CrossPotential& v2, const CrossSpectrum& cross);

struct MomentReport {
  double lambda = 0.0;
  long long n_of_lambda = 0;
  double moment = 0.0;
  double target = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
};

MomentReport density_moment(const EigenTable& table, const CrossSpectrum& cross, double lambda, const Potential& v1,
                            const CrossPotential& v2, const BoundaryProfile& b);

/// Fraction of the spectral density with x ≤ L/√λ.
double mass_capture(const EigenTable& table, double lambda, double l);

struct HellmannFeynman {
  double fd_value = 0.0;
  double pairing_value = 0.0;
  double gap = 0.0;
  std::size_t n_below = 0;
  double epsilon = 0.0;
};

HellmannFeynman hellmann_feynman(const ReferenceSpectrum& ref, double s, const Potential& v, double epsilon,
                                 const HalfLineOptions& options = {});

std::string table_csv(const EigenTable& table);
ordered_json to_json(const MomentReport& report);

}  // namespace grushin
