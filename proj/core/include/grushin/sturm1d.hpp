#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "grushin/potential.hpp"

namespace grushin {

enum class BoundaryCondition { dirichlet, neumann };

/// Uniform grid of interior nodes x_i = i·h, i = 1..N, h = x_max/(N+1).
/// The singular endpoint x = 0 is never a node.
struct Grid1D {
  double x_max = 1.0;
  std::size_t n_points = 1;

  Grid1D() = default;
  Grid1D(double x_max, std::size_t n_points);

  double spacing() const noexcept { return x_max / static_cast<double>(n_points + 1); }
  /// Node i for 0-based i (so node(0) = h).
  double node(std::size_t i) const noexcept { return static_cast<double>(i + 1) * spacing(); }
  /// The grid with N and 2N+1 interior nodes share every other node and halve h.
  Grid1D refined() const { return Grid1D(x_max, 2 * n_points + 1); }
};

/// q(x) = c_coef/x² + mu·x^β + extra(x)
struct PotentialSpec {
  double c_coef = 0.0;
  double mu = 0.0;
  double beta = 1.0;
  std::optional<Potential> extra;

  double operator()(double x) const;
};

/// Symmetric tridiagonal matrix; for discretized operators the off-diagonal
/// is the constant −1/h².
struct TridiagonalOperator {
  std::vector<double> diagonal;
  std::vector<double> offdiagonal;
  Grid1D grid;
  BoundaryCondition right_bc = BoundaryCondition::dirichlet;

  std::size_t size() const noexcept { return diagonal.size(); }
  /// Gershgorin interval containing the whole spectrum.
  std::pair<double, double> spectral_bounds() const;
};

/// Wraps an arbitrary Jacobi matrix (used for property tests and by callers
/// that assemble their own stencils). The grid is a unit-spacing placeholder.
TridiagonalOperator make_jacobi(std::vector<double> diagonal, std::vector<double> offdiagonal);

TridiagonalOperator discretize(const PotentialSpec& pot, const Grid1D& grid, BoundaryCondition right_bc);

/// Number of eigenvalues strictly below kappa (Sturm inertia, one O(N) pass).
std::size_t count_below(const TridiagonalOperator& t, double kappa);

struct RefinementTriple {
  double coarse = 0.0;        ///< grid h
  double fine = 0.0;          ///< grid h/2
  double extrapolated = 0.0;  ///< (4·fine − coarse)/3
};

struct EigenSolveReport {
  std::vector<double> eigenvalues;
  double tolerance_achieved = 0.0;
  std::vector<RefinementTriple> refinement;
  bool converged = true;
  std::size_t n_points = 0;  ///< coarse grid size of the last refinement pair
};

/// All eigenvalues < kappa, bracketed to width ≤ tol.
EigenSolveReport eigenvalues_below(const TridiagonalOperator& t, double kappa, double tol);

/// The k lowest eigenvalues (k ≤ N), bracketed to width ≤ tol.
std::vector<double> lowest_eigenvalues(const TridiagonalOperator& t, std::size_t k, double tol);

/// Σ (kappa − λ_i)₊
double trace_neg(const TridiagonalOperator& t, double kappa);

/// Inverse iteration at the shift lambda_hat. Normalized to h·Σv² = 1, first
/// entry above 1e-8 in magnitude positive. `tol` is the accuracy of
/// lambda_hat, used for the cluster check.
std::vector<double> eigenfunction(const TridiagonalOperator& t, double lambda_hat, double tol = 0.0);

/// Default bisection width for an operator: a few ulps of its spectral radius.
double default_tolerance(const TridiagonalOperator& t);

struct RefinementOptions {
  std::size_t initial_points = 0;  ///< 0: chosen from the wavelength rule
  std::size_t max_points = std::size_t{1} << 21;
  double nodes_per_wavelength = 20.0;
};

/// Richardson-extrapolated lowest k_wanted eigenvalues on [0, x_max].
EigenSolveReport solve_with_refinement(const PotentialSpec& pot, double x_max, BoundaryCondition right_bc,
                                       std::size_t k_wanted, double target_tol,
                                       const RefinementOptions& options = {});

/// Interior node count meeting `nodes_per_wavelength` nodes per local
/// wavelength 2π/√(κ − q)₊ everywhere on (0, x_max).
std::size_t points_for_energy(const PotentialSpec& pot, double x_max, double kappa, double nodes_per_wavelength);

}  // namespace grushin
