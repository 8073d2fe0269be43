#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace grushin {

/// Bounded continuous potential V(x) on [0, ∞) from a small descriptor family:
///   const:c            V = c
///   exp:a,b            V = a e^{-b x}
///   indicator:a,b      V = a 1[x ≤ b]
///   file:path          linear interpolation of a two-column `x,V` table
/// Every descriptor carries an amplitude and an argument scale so that the
/// rescaling V_λ(x) = λ V(√λ x) stays in the family.
class Potential {
 public:
  enum class Kind { constant, exponential, indicator, tabulated };

  static Potential constant(double c);
  static Potential exponential(double a, double b);
  static Potential indicator(double a, double b);
  static Potential tabulated(std::vector<double> xs, std::vector<double> values);

  /// Parses the CLI descriptor syntax above.
  static Potential parse(std::string_view descriptor);

  Kind kind() const noexcept { return kind_; }
  double operator()(double x) const;

  /// sup |V|
  double sup_norm() const;
  /// inf V (≤ 0 contributions lower the spectrum by at most this much)
  double infimum() const;
  /// lim V(x) as x → ∞ (tabulated: the last sample)
  double value_at_infinity() const;
  bool is_constant() const noexcept { return kind_ == Kind::constant; }

  /// λ V(√λ x)
  Potential rescaled(double lambda) const;
  /// factor · V(x)
  Potential scaled(double factor) const;
  /// V(x) + delta
  Potential shifted(double delta) const;

  std::string describe() const;

 private:
  Potential() = default;
  double shape(double y) const;
  std::pair<double, double> range() const;

  Kind kind_ = Kind::constant;
  double a_ = 0.0;
  double b_ = 0.0;
  double amplitude_ = 1.0;
  double argument_scale_ = 1.0;
  double offset_ = 0.0;
  std::shared_ptr<const std::vector<double>> xs_;
  std::shared_ptr<const std::vector<double>> values_;
  std::string source_;
};

}  // namespace grushin
