#include "grushin/params.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "grushin/error.hpp"

namespace grushin {
namespace {

double semiclassical_constant(int n) {
  const double half_n = 0.5 * n;
  return std::pow(4.0 * std::numbers::pi, -half_n) / std::tgamma(1.0 + half_n);
}

GrushinParams build(int n, double beta, Regime regime) {
  GrushinParams p;
  p.n = n;
  p.beta = beta;
  const double l = beta * n / 4.0;
  p.c_beta = l * (1.0 + l);
  p.d = n * (1.0 + beta / 2.0);
  p.l_cl = semiclassical_constant(n);
  p.regime = regime;
  return p;
}

void check_domain(int n, double beta) {
  require(n >= 1, ErrorCode::parameter_domain, "n must be a positive integer, got " + std::to_string(n));
  require(std::isfinite(beta) && beta > 0.0, ErrorCode::parameter_domain,
          "beta must be a positive real, got " + std::to_string(beta));
}

std::int64_t parse_digits(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    fail(ErrorCode::parameter_domain, "not an exact rational: '" + std::string(whole) + "'");
  return v;
}

}  // namespace

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::subcritical: return "subcritical";
    case Regime::critical: return "critical";
    case Regime::supercritical: return "supercritical";
  }
  return "unknown";
}

Rational parse_rational(std::string_view text) {
  Rational r;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    r.num = parse_digits(text.substr(0, slash), text);
    r.den = parse_digits(text.substr(slash + 1), text);
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string digits(text.substr(0, dot));
    const auto frac = text.substr(dot + 1);
    digits += frac;
    if (frac.size() > 17) fail(ErrorCode::parameter_domain, "too many decimals: '" + std::string(text) + "'");
    r.num = parse_digits(digits, text);
    r.den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) r.den *= 10;
  } else {
    r.num = parse_digits(text, text);
  }
  require(r.den > 0, ErrorCode::parameter_domain, "zero denominator in '" + std::string(text) + "'");
  const auto g = std::gcd(r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

GrushinParams derive_params(int n, double beta) {
  check_domain(n, beta);
  const double nb = n * beta;
  const Regime regime = nb > 2.0 ? Regime::supercritical : (nb == 2.0 ? Regime::critical : Regime::subcritical);
  return build(n, beta, regime);
}

GrushinParams derive_params(int n, Rational beta) {
  require(beta.num > 0 && beta.den > 0, ErrorCode::parameter_domain, "beta must be a positive rational");
  check_domain(n, beta.value());
  // nβ vs 2  <=>  n·num vs 2·den, exactly.
  // With num/den reduced, n·num = 2·den forces num ∈ {1, 2}, so the critical
  // case never involves large products; otherwise the ordering is decided in
  // long double.
  Regime regime;
  if (beta.num <= 2 && n * beta.num == 2 * beta.den) {
    regime = Regime::critical;
  } else {
    std::int64_t lhs = 0, rhs = 0;
    const bool overflow = __builtin_mul_overflow(std::int64_t{n}, beta.num, &lhs) ||
                          __builtin_mul_overflow(std::int64_t{2}, beta.den, &rhs);
    const bool above = overflow ? static_cast<long double>(n) * beta.num > 2.0L * beta.den : lhs > rhs;
    regime = above ? Regime::supercritical : Regime::subcritical;
  }
  return build(n, beta.value(), regime);
}

double beta_from_alpha(double alpha) {
  require(alpha > 0.0 && alpha < 2.0, ErrorCode::parameter_domain, "alpha must lie in (0, 2)");
  return 2.0 * alpha / (2.0 - alpha);
}

double alpha_from_beta(double beta) {
  require(beta > 0.0 && std::isfinite(beta), ErrorCode::parameter_domain, "beta must be a positive real");
  return 2.0 * beta / (2.0 + beta);
}

GasPlanetParams gas_planet_params(int n, double alpha) {
  GasPlanetParams g;
  g.alpha = alpha;
  g.grushin = derive_params(n, beta_from_alpha(alpha));
  g.rate_exponent = 1.0 / (2.0 - alpha);
  return g;
}

double map_u_to_x(double u, double alpha) {
  require(alpha > 0.0 && alpha < 2.0, ErrorCode::parameter_domain, "alpha must lie in (0, 2)");
  require(u >= 0.0, ErrorCode::parameter_domain, "u must be nonnegative");
  const double a = 1.0 - alpha / 2.0;
  return std::pow(u, a) / a;
}

double map_x_to_u(double x, double alpha) {
  require(alpha > 0.0 && alpha < 2.0, ErrorCode::parameter_domain, "alpha must lie in (0, 2)");
  require(x >= 0.0, ErrorCode::parameter_domain, "x must be nonnegative");
  const double a = 1.0 - alpha / 2.0;
  return std::pow(a * x, 1.0 / a);
}

}  // namespace grushin
