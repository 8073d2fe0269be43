#include "grushin/profile.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "grushin/error.hpp"
#include "grushin/parallel.hpp"

namespace grushin {
namespace {

void require_supercritical(const GrushinParams& params, const char* what) {
  if (!params.supercritical())
    fail(ErrorCode::regime, std::string(what) + " needs the supercritical regime nβ > 2 (got n = " +
                                std::to_string(params.n) + ", β = " + format_double(params.beta) + ", " +
                                std::string(to_string(params.regime)) + ")");
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

double interpolate(std::span<const double> x, std::span<const double> y, double at) {
  if (at <= x.front()) return at == x.front() ? y.front() : 0.0;
  if (at > x.back()) return 0.0;
  const auto it = std::lower_bound(x.begin(), x.end(), at);
  const auto i = static_cast<std::size_t>(it - x.begin());
  if (x[i] == at) return y[i];
  const double w = (at - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * y[i - 1] + w * y[i];
}

// Slope of log P against log abscissa over the first few positive samples.
double observed_vanishing_order(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && lx.size() < 6; ++i)
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return 0.0;
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ∫_a^b g with square-root behaviour at both ends: t = a + (b−a)(1−cos θ)/2
// makes the integrand smooth in θ.
template <class G>
double integrate_sqrt_ends(G&& g, double a, double b) {
  const double half = 0.5 * (b - a);
  auto f = [&](double theta) { return g(a + half * (1.0 - std::cos(theta))) * half * std::sin(theta); };
  return boost::math::quadrature::gauss<double, 64>::integrate(f, 0.0, std::numbers::pi);
}

// Semiclassical spectral function of the eigenpairs beyond K, integrated
// against t^d as in the quantum terms:
//   d∫_0^{T*} t^d (γ/π)[√(t^{-2} − q(tx))₊ − √(Λ_K − q(tx))₊] dt,
// q(y) = (ℓ+½)²/y² + y^β, T* = Λ_K^{-1/2}.
class SemiclassicalRemainder {
 public:
  SemiclassicalRemainder(const GrushinParams& params, const ZetaValue& zeta)
      : params_(params), l2_(params.c_beta + 0.25) {
    const double beta = params.beta;
    const double p = zeta.growth_exponent;
    lambda_k_ = std::pow(zeta.fit_slope * (static_cast<double>(zeta.k_used) + 0.5 + zeta.fit_offset), p);
    t_star_ = 1.0 / std::sqrt(lambda_k_);
    const double i_beta =
        std::tgamma(1.0 / beta) * std::tgamma(1.5) / (beta * std::tgamma(1.0 / beta + 1.5));
    gamma_ = std::numbers::pi / (zeta.fit_slope * i_beta);
  }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    const double beta = params_.beta;
    const double d = params_.d;
    double upper = 0.0;
    const double room = 1.0 - l2_ / (x * x);
    if (room > 0.0) {
      const double t1 = std::min(t_star_, std::pow(room / std::pow(x, beta), 1.0 / (beta + 2.0)));
      auto g = [&](double t) {
        return std::pow(t, d - 1.0) * std::sqrt(std::max(0.0, room - std::pow(t, beta + 2.0) * std::pow(x, beta)));
      };
      upper = integrate_sqrt_ends(g, 0.0, t1);
    }
    double lower = 0.0;
    if (const auto tp = turning_points(params_, 1.0, lambda_k_)) {
      const double a = tp->first / x;
      const double b = std::min(tp->second / x, t_star_);
      if (b > a) {
        auto g = [&](double t) {
          const double y = t * x;
          return std::pow(t, d) * std::sqrt(std::max(0.0, lambda_k_ - l2_ / (y * y) - std::pow(y, beta)));
        };
        lower = integrate_sqrt_ends(g, a, b);
      }
    }
    return std::max(0.0, d * gamma_ / std::numbers::pi * (upper - lower));
  }

 private:
  GrushinParams params_;
  double l2_;
  double lambda_k_ = 0.0;
  double t_star_ = 0.0;
  double gamma_ = 1.0;
};

}  // namespace

ZetaValue spectral_zeta(const ReferenceSpectrum& ref, double exponent, std::size_t k_used) {
  const double p = ref.params.growth_exponent();
  if (!(exponent * p > 1.0))
    fail(ErrorCode::regime, "spectral zeta diverges at exponent " + format_double(exponent) +
                                " (needs exponent·2β/(β+2) > 1; the critical and subcritical cases diverge)");
  const std::size_t k = k_used == 0 ? ref.size() : k_used;
  require(k >= 1 && k <= ref.size(), ErrorCode::range,
          "k_used = " + std::to_string(k) + " outside 1.." + std::to_string(ref.size()));
  ZetaValue z;
  z.exponent = exponent;
  z.growth_exponent = p;
  z.k_used = k;
  for (std::size_t i = 0; i < k; ++i) z.partial_sum += std::pow(ref.eigenvalues[i], -exponent);

  // least squares λ_k^{1/p} = a k + b over the last decade
  const std::size_t first = k >= 10 ? k - k * 9 / 10 : 1;
  if (k - first + 1 >= 2) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = first; i <= k; ++i) {
      const double x = static_cast<double>(i);
      const double y = std::pow(ref.eigenvalues[i - 1], 1.0 / p);
      n += 1;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    z.fit_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    z.fit_offset = (sy - z.fit_slope * sx) / n / z.fit_slope;
  } else {
    z.fit_slope = std::pow(ref.eigenvalues[0], 1.0 / p);
    z.fit_offset = 0.0;
  }
  require(z.fit_slope > 0.0, ErrorCode::consistency, "growth fit of the reference spectrum is not increasing");
  const double pe = p * exponent;
  z.tail_estimate = std::pow(z.fit_slope, -pe) *
                    std::pow(static_cast<double>(k) + 0.5 + z.fit_offset, 1.0 - pe) / (pe - 1.0);
  z.value = z.partial_sum + z.tail_estimate;
  return z;
}

WeylConstant weyl_constant(const GrushinParams& params, const ZetaValue& zeta) {
  require_supercritical(params, "the Weyl constant");
  WeylConstant w;
  w.zeta_value = zeta.value;
  w.value = params.l_cl * zeta.value;
  w.k_used = zeta.k_used;
  w.tail_estimate = zeta.tail_estimate;
  return w;
}

WeylConstant weyl_constant(const ReferenceSpectrum& ref) {
  require_supercritical(ref.params, "the Weyl constant");
  return weyl_constant(ref.params, spectral_zeta(ref, ref.params.d / 2.0));
}

std::vector<double> default_profile_grid(const ReferenceSpectrum& ref) {
  const double core = 1.2 * ref.x_max() / std::sqrt(ref.lambda(1));
  std::vector<double> x;
  x.reserve(640);
  for (int i = 0; i < 400; ++i) x.push_back(core * i / 399.0);
  const double ratio = std::pow(1e4, 1.0 / 240.0);
  for (int i = 1; i <= 240; ++i) x.push_back(core * std::pow(ratio, i));
  return x;
}

BoundaryProfile compute_profile_B(const ReferenceSpectrum& ref, std::span<const double> x_grid,
                                  const ProfileQuadrature& quad) {
  const auto& params = ref.params;
  require_supercritical(params, "the boundary profile B");
  require(!ref.eigenfunctions.empty(), ErrorCode::consistency, "reference spectrum carries no eigenfunctions");
  require(x_grid.size() >= 2, ErrorCode::parameter_domain, "profile grid needs at least two abscissae");
  require(x_grid.front() == 0.0, ErrorCode::parameter_domain, "profile grid must start at 0");
  for (std::size_t i = 1; i < x_grid.size(); ++i)
    require(x_grid[i] > x_grid[i - 1], ErrorCode::parameter_domain, "profile grid must be strictly ascending");
  require(quad.t_points >= 2, ErrorCode::parameter_domain, "t-grid needs at least two points");

  const std::size_t k_used = quad.k_used == 0 ? ref.size() : quad.k_used;
  const ZetaValue zeta = spectral_zeta(ref, params.d / 2.0, k_used);
  const WeylConstant c = weyl_constant(params, zeta);
  const double prefactor = params.l_cl / c.value;
  const double d = params.d;
  const double x_ref = ref.x_max();
  const std::size_t m = quad.t_points;

  std::optional<SemiclassicalRemainder> remainder;
  if (quad.semiclassical_remainder) remainder.emplace(params, zeta);

  auto value_at = [&](std::size_t i) {
    const double x = x_grid[i];
    if (x == 0.0) return 0.0;  // every φ_k vanishes at the Dirichlet end
    double sum = 0.0;
    for (std::size_t k = 1; k <= k_used; ++k) {
      // t ≤ λ_k^{-1/2}; past x_ref/x the eigenfunction is zero
      const double t_end = std::min(1.0 / std::sqrt(ref.lambda(k)), x_ref / x);
      const double dt = t_end / static_cast<double>(m - 1);
      double s = 0.0;
      for (std::size_t j = 1; j < m; ++j) {
        const double t = dt * static_cast<double>(j);
        const double phi = ref.eigenfunction_value(k, t * x);
        s += (j == m - 1 ? 0.5 : 1.0) * std::pow(t, d) * phi * phi;
      }
      sum += d * s * dt;
    }
    double b = prefactor * sum;
    if (remainder) b += prefactor * (*remainder)(x);
    return b;
  };

  BoundaryProfile out;
  out.kind = ProfileKind::B_of_x;
  out.params = params;
  out.k_used = k_used;
  out.zeta_tail_estimate = zeta.tail_estimate;
  out.abscissae.assign(x_grid.begin(), x_grid.end());
  out.values = parallel_map(quad.workers, x_grid.size(), value_at);
  out.tail_exponent = params.n * params.beta / 2.0;
  out.tail_mass = out.values.back() * out.abscissae.back() / (out.tail_exponent - 1.0);
  out.vanishing_order = observed_vanishing_order(out.abscissae, out.values);
  out.reliable_support = x_ref / std::sqrt(ref.lambda(1));
  out.support_warning = out.abscissae.back() > out.reliable_support;
  out.normalization_defect = std::abs(profile_integral(out) - 1.0);
  return out;
}

BoundaryProfile compute_profile_A(const BoundaryProfile& b, double alpha) {
  require(b.kind == ProfileKind::B_of_x, ErrorCode::consistency, "A is built from a B profile");
  const double beta = beta_from_alpha(alpha);
  if (std::abs(beta - b.params.beta) > 1e-12 * b.params.beta)
    fail(ErrorCode::consistency, "alpha = " + format_double(alpha) + " maps to β = " + format_double(beta) +
                                     " but the profile has β = " + format_double(b.params.beta));
  BoundaryProfile a = b;
  a.kind = ProfileKind::A_of_u;
  a.alpha = alpha;
  const double shrink = 1.0 - alpha / 2.0;  // x ∝ u^{shrink}
  for (std::size_t i = 0; i < b.abscissae.size(); ++i) {
    const double u = map_x_to_u(b.abscissae[i], alpha);
    a.abscissae[i] = u;
    if (u > 0.0) {
      a.values[i] = b.values[i] * std::pow(u, -alpha / 2.0);
    } else {
      // B ~ x^γ near 0 gives A ~ u^{γ(1-α/2) - α/2}
      const double e = b.vanishing_order * shrink - alpha / 2.0;
      a.values[i] = e > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
  }
  a.vanishing_order = b.vanishing_order * shrink - alpha / 2.0;
  a.tail_exponent = b.tail_exponent * shrink + alpha / 2.0;
  a.tail_mass = b.tail_mass;  // the substitution preserves mass beyond the mapped endpoint
  a.reliable_support = map_x_to_u(b.reliable_support, alpha);
  a.normalization_defect = std::abs(profile_integral(a) - 1.0);
  a.defect_bound = 2.0 * b.defect_bound;
  return a;
}

double profile_integral(const BoundaryProfile& p) {
  std::vector<double> y = p.values;
  for (double& v : y)
    if (!std::isfinite(v)) v = 0.0;
  return trapezoid(p.abscissae, y) + p.tail_mass;
}

double profile_pairing(const BoundaryProfile& p, const Potential& f) {
  std::vector<double> y(p.values.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::isfinite(p.values[i]) ? p.values[i] * f(p.abscissae[i]) : 0.0;
  return trapezoid(p.abscissae, y) + p.tail_mass * f(p.abscissae.back());
}

double profile_value(const BoundaryProfile& p, double abscissa) {
  return interpolate(p.abscissae, p.values, abscissa);
}

double profile_quantile(const BoundaryProfile& p, double fraction) {
  require(fraction >= 0.0 && fraction <= 1.0, ErrorCode::range, "quantile fraction must lie in [0, 1]");
  const double total = profile_integral(p);
  const double target = fraction * total;
  double cum = 0.0;
  if (cum >= target) return p.abscissae.front();
  for (std::size_t i = 1; i < p.abscissae.size(); ++i) {
    cum += 0.5 * (p.abscissae[i] - p.abscissae[i - 1]) * (p.values[i] + p.values[i - 1]);
    if (cum >= target) return p.abscissae[i];
  }
  return p.abscissae.back();
}

double back_substitution_error(const BoundaryProfile& a, const BoundaryProfile& b) {
  require(a.kind == ProfileKind::A_of_u && b.kind == ProfileKind::B_of_x && a.alpha, ErrorCode::consistency,
          "back substitution compares an A profile with its B profile");
  const double alpha = *a.alpha;
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 1; i < b.abscissae.size(); ++i) {
    const double x = 0.5 * (b.abscissae[i] + b.abscissae[i - 1]);
    const double w = b.abscissae[i] - b.abscissae[i - 1];
    const double bx = 0.5 * (b.values[i] + b.values[i - 1]);
    const double u = map_x_to_u(x, alpha);
    const double from_a = profile_value(a, u) * std::pow(u, alpha / 2.0);
    diff += std::abs(from_a - bx) * w;
    norm += std::abs(bx) * w;
  }
  return diff / norm;
}

std::string profile_csv(const BoundaryProfile& p) {
  const bool is_a = p.kind == ProfileKind::A_of_u;
  std::string out = std::string("# kind=") + (is_a ? "A" : "B") + " n=" + std::to_string(p.params.n) +
                    " beta=" + format_double(p.params.beta);
  if (p.alpha) out += " alpha=" + format_double(*p.alpha);
  out += " k_used=" + std::to_string(p.k_used) + " defect=" + format_double(p.normalization_defect) + "\n";
  out += is_a ? "u,value\n" : "x,value\n";
  for (std::size_t i = 0; i < p.abscissae.size(); ++i)
    out += format_double(p.abscissae[i]) + "," + format_double(p.values[i]) + "\n";
  return out;
}

ordered_json to_json(const BoundaryProfile& p) {
  ordered_json j;
  j["kind"] = p.kind == ProfileKind::A_of_u ? "A" : "B";
  j["n"] = p.params.n;
  j["beta"] = p.params.beta;
  if (p.alpha) j["alpha"] = *p.alpha;
  j["k_used"] = p.k_used;
  j["defect"] = p.normalization_defect;
  j["defect_bound"] = p.defect_bound;
  j["zeta_tail_estimate"] = p.zeta_tail_estimate;
  j["tail_mass"] = p.tail_mass;
  j["tail_exponent"] = p.tail_exponent;
  j["vanishing_order"] = p.vanishing_order;
  j["reliable_support"] = p.reliable_support;
  j["support_warning"] = p.support_warning;
  j[p.kind == ProfileKind::A_of_u ? "u" : "x"] = p.abscissae;
  j["value"] = p.values;
  return j;
}

}  // namespace grushin
