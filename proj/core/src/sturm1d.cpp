#include "grushin/sturm1d.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>

#include "grushin/error.hpp"

namespace grushin {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Squared off-diagonal and the pivot floor of the guarded Sturm recurrence.
struct SturmData {
  const std::vector<double>* diagonal;
  std::vector<double> e2;
  double pivmin;

  explicit SturmData(const TridiagonalOperator& t) : diagonal(&t.diagonal), e2(t.offdiagonal.size()) {
    double e2max = 1.0;
    for (std::size_t i = 0; i < e2.size(); ++i) {
      e2[i] = t.offdiagonal[i] * t.offdiagonal[i];
      e2max = std::max(e2max, e2[i]);
    }
    pivmin = DBL_MIN * e2max;
  }

  std::size_t count(double kappa) const {
    const double* d = diagonal->data();
    const std::size_t n = diagonal->size();
    std::size_t c = 0;
    double q = d[0] - kappa;
    if (std::abs(q) < pivmin) q = pivmin;  // zero pivot: treat kappa as not above the eigenvalue
    c += q < 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      q = (d[i] - kappa) - e2[i - 1] / q;
      if (std::abs(q) < pivmin) q = pivmin;
      c += q < 0.0;
    }
    return c;
  }
};

double resolution(double lo, double hi) { return 2.0 * kEps * std::max({std::abs(lo), std::abs(hi), DBL_MIN}); }

// Bisects [lo, hi) holding eigenvalue indices [nlo, nhi); only indices below
// idx_end are resolved.
void bisect(const SturmData& s, double lo, double hi, std::size_t nlo, std::size_t nhi, std::size_t idx_end,
            double tol, std::vector<double>& out) {
  struct Interval {
    double lo, hi;
    std::size_t nlo, nhi;
  };
  std::vector<Interval> stack{{lo, hi, nlo, nhi}};
  while (!stack.empty()) {
    Interval iv = stack.back();
    stack.pop_back();
    if (iv.nlo >= iv.nhi || iv.nlo >= idx_end) continue;
    const double mid = 0.5 * (iv.lo + iv.hi);
    if (iv.hi - iv.lo <= tol || mid <= iv.lo || mid >= iv.hi) {
      for (std::size_t i = iv.nlo; i < std::min(iv.nhi, idx_end); ++i) out[i] = mid;
      continue;
    }
    const std::size_t nm = s.count(mid);
    stack.push_back({mid, iv.hi, nm, iv.nhi});
    stack.push_back({iv.lo, mid, iv.nlo, nm});
  }
}

// LU factorization with partial pivoting of a tridiagonal matrix (LAPACK
// gttrf layout), used for inverse iteration.
struct TridiagonalLU {
  std::vector<double> dl, d, du, du2;
  std::vector<unsigned char> swapped;

  TridiagonalLU(const TridiagonalOperator& t, double shift) {
    const std::size_t n = t.size();
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = t.diagonal[i] - shift;
    dl = t.offdiagonal;
    du = t.offdiagonal;
    du2.assign(n > 2 ? n - 2 : 0, 0.0);
    swapped.assign(n, 0);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = std::abs(d[i]);
      if (i > 0) row += std::abs(dl[i - 1]);
      if (i + 1 < n) row += std::abs(du[i]);
      norm = std::max(norm, row);
    }
    const double floor = kEps * std::max(norm, DBL_MIN);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (std::abs(d[i]) < floor) d[i] = floor;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = 1;
      }
    }
    if (n > 0 && std::abs(d[n - 1]) < floor) d[n - 1] = floor;
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n >= 2 ? n - 2 : 0; i-- > 0;) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
  }
};

double euclidean_norm(const std::vector<double>& v) {
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x / scale) * (x / scale);
  return scale * std::sqrt(s);
}

}  // namespace

Grid1D::Grid1D(double x_max_, std::size_t n_points_) : x_max(x_max_), n_points(n_points_) {
  require(std::isfinite(x_max) && x_max > 0.0, ErrorCode::parameter_domain, "grid needs x_max > 0");
  require(n_points >= 1, ErrorCode::parameter_domain, "grid needs at least one interior node");
}

double PotentialSpec::operator()(double x) const {
  double q = 0.0;
  if (c_coef != 0.0) q += c_coef / (x * x);
  if (mu != 0.0) q += mu * std::pow(x, beta);
  if (extra) q += (*extra)(x);
  return q;
}

std::pair<double, double> TridiagonalOperator::spectral_bounds() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(offdiagonal[i - 1]);
    if (i + 1 < n) r += std::abs(offdiagonal[i]);
    lo = std::min(lo, diagonal[i] - r);
    hi = std::max(hi, diagonal[i] + r);
  }
  return {lo, hi};
}

TridiagonalOperator make_jacobi(std::vector<double> diagonal, std::vector<double> offdiagonal) {
  require(!diagonal.empty() && offdiagonal.size() + 1 == diagonal.size(), ErrorCode::parameter_domain,
          "Jacobi matrix needs N diagonal and N-1 off-diagonal entries");
  TridiagonalOperator t;
  t.grid = Grid1D(static_cast<double>(diagonal.size() + 1), diagonal.size());
  t.diagonal = std::move(diagonal);
  t.offdiagonal = std::move(offdiagonal);
  return t;
}

TridiagonalOperator discretize(const PotentialSpec& pot, const Grid1D& grid, BoundaryCondition right_bc) {
  require(pot.c_coef >= 0.0 && pot.mu >= 0.0 && pot.beta > 0.0, ErrorCode::parameter_domain,
          "potential needs c_coef ≥ 0, mu ≥ 0, beta > 0");
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  require(std::isfinite(inv_h2), ErrorCode::discretization, "grid spacing too small for the 1/h² stencil");
  TridiagonalOperator t;
  t.grid = grid;
  t.right_bc = right_bc;
  t.diagonal.resize(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double q = pot(grid.node(i));
    if (!std::isfinite(q) || !std::isfinite(2.0 * inv_h2 + q))
      fail(ErrorCode::discretization, "potential overflows at x = " + std::to_string(grid.node(i)) +
                                          "; use a larger spacing or a smaller inverse-square coefficient");
    t.diagonal[i] = 2.0 * inv_h2 + q;
  }
  if (right_bc == BoundaryCondition::neumann) t.diagonal.back() -= inv_h2;
  t.offdiagonal.assign(grid.n_points - 1, -inv_h2);
  return t;
}

std::size_t count_below(const TridiagonalOperator& t, double kappa) {
  if (t.size() == 0) return 0;
  return SturmData(t).count(kappa);
}

double default_tolerance(const TridiagonalOperator& t) {
  const auto [lo, hi] = t.spectral_bounds();
  return 8.0 * resolution(lo, hi);
}

EigenSolveReport eigenvalues_below(const TridiagonalOperator& t, double kappa, double tol) {
  require(tol > 0.0, ErrorCode::tolerance, "bisection tolerance must be positive");
  EigenSolveReport report;
  report.n_points = t.size();
  report.tolerance_achieved = tol;
  if (t.size() == 0) return report;
  auto [lo, hi] = t.spectral_bounds();
  lo -= resolution(lo, hi) + DBL_MIN;
  hi = std::min(kappa, hi + resolution(lo, hi) + DBL_MIN);
  if (tol < resolution(lo, hi))
    fail(ErrorCode::tolerance, "tolerance " + std::to_string(tol) + " is below the floating resolution " +
                                   std::to_string(resolution(lo, hi)) + " of the spectrum");
  const SturmData s(t);
  const std::size_t n_hi = s.count(hi);
  report.eigenvalues.resize(n_hi);
  if (n_hi > 0) bisect(s, lo, hi, 0, n_hi, n_hi, tol, report.eigenvalues);
  return report;
}

std::vector<double> lowest_eigenvalues(const TridiagonalOperator& t, std::size_t k, double tol) {
  require(k <= t.size(), ErrorCode::range, "requested more eigenvalues than grid nodes");
  require(tol > 0.0, ErrorCode::tolerance, "bisection tolerance must be positive");
  std::vector<double> out(k);
  if (k == 0) return out;
  auto [lo, hi] = t.spectral_bounds();
  const double margin = resolution(lo, hi) + DBL_MIN;
  lo -= margin;
  hi += margin;
  if (tol < resolution(lo, hi)) fail(ErrorCode::tolerance, "tolerance below the floating resolution of the spectrum");
  const SturmData s(t);
  bisect(s, lo, hi, 0, t.size(), k, tol, out);
  return out;
}

double trace_neg(const TridiagonalOperator& t, double kappa) {
  const auto report = eigenvalues_below(t, kappa, default_tolerance(t));
  double sum = 0.0;
  for (double e : report.eigenvalues) sum += kappa - e;
  return sum;
}

std::vector<double> eigenfunction(const TridiagonalOperator& t, double lambda_hat, double tol) {
  const std::size_t n = t.size();
  require(n > 0, ErrorCode::parameter_domain, "empty operator");
  if (tol <= 0.0) tol = default_tolerance(t);
  if (n > 1) {
    const SturmData s(t);
    if (s.count(lambda_hat + 10.0 * tol) - s.count(lambda_hat - 10.0 * tol) > 1)
      fail(ErrorCode::degeneracy, "two eigenvalues within 10·tol of the shift " + std::to_string(lambda_hat));
  }
  const TridiagonalLU lu(t, lambda_hat);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i % 7 + 1) / 7.0;
  double nx = euclidean_norm(x);
  for (double& v : x) v /= nx;
  bool converged = false;
  for (int iter = 0; iter < 50 && !converged; ++iter) {
    std::vector<double> y = x;
    lu.solve(y);
    const double ny = euclidean_norm(y);
    if (!(ny > 0.0) || !std::isfinite(ny)) fail(ErrorCode::iteration, "inverse iteration broke down");
    double overlap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= ny;
      overlap += y[i] * x[i];
    }
    converged = iter > 0 && std::abs(std::abs(overlap) - 1.0) < 1e-14;
    // keep orientation stable between iterates
    if (overlap < 0.0)
      for (double& v : y) v = -v;
    x = std::move(y);
  }
  if (!converged) fail(ErrorCode::iteration, "inverse iteration did not converge in 50 iterations");
  const double h = t.grid.spacing();
  double s2 = 0.0;
  for (double v : x) s2 += v * v;
  const double scale = 1.0 / std::sqrt(h * s2);
  const auto first = std::find_if(x.begin(), x.end(), [&](double v) { return std::abs(v * scale) > 1e-8; });
  const double sign = (first != x.end() && *first < 0.0) ? -1.0 : 1.0;
  for (double& v : x) v *= sign * scale;
  return x;
}

std::size_t points_for_energy(const PotentialSpec& pot, double x_max, double kappa, double nodes_per_wavelength) {
  // Sample (κ − q)₊ densely; q is smooth away from 0, where it only grows.
  constexpr int kSamples = 4096;
  double kmax = 0.0;
  for (int i = 1; i <= kSamples; ++i) {
    const double x = x_max * static_cast<double>(i) / kSamples;
    kmax = std::max(kmax, kappa - pot(x));
  }
  kmax = std::sqrt(std::max(kmax, 1e-12));
  const double h = 2.0 * std::numbers::pi / (nodes_per_wavelength * kmax);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(x_max / h) - 1.0));
}

EigenSolveReport solve_with_refinement(const PotentialSpec& pot, double x_max, BoundaryCondition right_bc,
                                       std::size_t k_wanted, double target_tol, const RefinementOptions& options) {
  require(k_wanted >= 1, ErrorCode::parameter_domain, "k_wanted must be at least 1");
  require(target_tol > 0.0, ErrorCode::tolerance, "target tolerance must be positive");
  std::size_t n = options.initial_points;
  if (n == 0) {
    const std::size_t probe = std::max<std::size_t>(400, 8 * k_wanted);
    const auto t = discretize(pot, Grid1D(x_max, probe), right_bc);
    const double e_top = lowest_eigenvalues(t, k_wanted, default_tolerance(t)).back();
    n = std::max<std::size_t>(probe, points_for_energy(pot, x_max, e_top, options.nodes_per_wavelength));
  }
  require(n >= k_wanted, ErrorCode::range, "grid has fewer nodes than requested eigenvalues");

  auto solve = [&](std::size_t points) {
    const auto t = discretize(pot, Grid1D(x_max, points), right_bc);
    return lowest_eigenvalues(t, k_wanted, default_tolerance(t));
  };
  EigenSolveReport report;
  std::vector<double> coarse = solve(n);
  for (;;) {
    const std::size_t fine_n = 2 * n + 1;
    std::vector<double> fine = solve(fine_n);
    report.refinement.resize(k_wanted);
    report.eigenvalues.resize(k_wanted);
    double estimate = 0.0;
    for (std::size_t k = 0; k < k_wanted; ++k) {
      const double ext = (4.0 * fine[k] - coarse[k]) / 3.0;
      report.refinement[k] = {coarse[k], fine[k], ext};
      report.eigenvalues[k] = ext;
      estimate = std::max(estimate, std::abs(coarse[k] - fine[k]) / std::max(std::abs(ext), DBL_MIN));
    }
    report.tolerance_achieved = estimate;
    report.n_points = n;
    if (estimate <= target_tol) {
      report.converged = true;
      return report;
    }
    if (2 * fine_n + 1 > options.max_points) {
      report.converged = false;
      return report;
    }
    n = fine_n;
    coarse = std::move(fine);
  }
}

}  // namespace grushin
