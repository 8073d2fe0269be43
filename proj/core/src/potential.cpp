#include "grushin/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "grushin/error.hpp"
#include "grushin/serialize.hpp"

namespace grushin {
namespace {

double parse_number(std::string_view text, std::string_view descriptor) {
  try {
    std::size_t used = 0;
    const std::string s(text);
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::logic_error&) {
  }
  fail(ErrorCode::parameter_domain, "bad number '" + std::string(text) + "' in potential '" +
                                        std::string(descriptor) + "'");
}

std::pair<double, double> parse_pair(std::string_view args, std::string_view descriptor) {
  const auto comma = args.find(',');
  require(comma != std::string_view::npos, ErrorCode::parameter_domain,
          "expected two comma-separated numbers in '" + std::string(descriptor) + "'");
  return {parse_number(args.substr(0, comma), descriptor), parse_number(args.substr(comma + 1), descriptor)};
}

Potential load_table(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open potential table " + path);
  std::vector<double> xs, vs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      fail(ErrorCode::schema, path + " line " + std::to_string(line_no) + ": expected 'x,V'");
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      fail(ErrorCode::schema, path + " line " + std::to_string(line_no) + ": malformed row");
    }
  }
  return Potential::tabulated(std::move(xs), std::move(vs));
}

}  // namespace

Potential Potential::constant(double c) {
  require(std::isfinite(c), ErrorCode::parameter_domain, "constant potential must be finite");
  Potential p;
  p.kind_ = Kind::constant;
  p.a_ = c;
  return p;
}

Potential Potential::exponential(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && b >= 0.0, ErrorCode::parameter_domain,
          "exp potential needs finite a and b ≥ 0");
  Potential p;
  p.kind_ = Kind::exponential;
  p.a_ = a;
  p.b_ = b;
  return p;
}

Potential Potential::indicator(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && b >= 0.0, ErrorCode::parameter_domain,
          "indicator potential needs finite a and b ≥ 0");
  Potential p;
  p.kind_ = Kind::indicator;
  p.a_ = a;
  p.b_ = b;
  return p;
}

Potential Potential::tabulated(std::vector<double> xs, std::vector<double> values) {
  require(xs.size() >= 2 && xs.size() == values.size(), ErrorCode::schema,
          "tabulated potential needs at least two (x, V) rows");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(std::isfinite(xs[i]) && std::isfinite(values[i]), ErrorCode::schema, "non-finite table entry");
    require(i == 0 || xs[i - 1] < xs[i], ErrorCode::schema, "table abscissae must be strictly ascending");
  }
  Potential p;
  p.kind_ = Kind::tabulated;
  p.xs_ = std::make_shared<const std::vector<double>>(std::move(xs));
  p.values_ = std::make_shared<const std::vector<double>>(std::move(values));
  return p;
}

Potential Potential::parse(std::string_view descriptor) {
  const auto colon = descriptor.find(':');
  require(colon != std::string_view::npos, ErrorCode::parameter_domain,
          "potential descriptor must look like kind:args, got '" + std::string(descriptor) + "'");
  const auto kind = descriptor.substr(0, colon);
  const auto args = descriptor.substr(colon + 1);
  if (kind == "const") return constant(parse_number(args, descriptor));
  if (kind == "exp") {
    auto [a, b] = parse_pair(args, descriptor);
    return exponential(a, b);
  }
  if (kind == "indicator") {
    auto [a, b] = parse_pair(args, descriptor);
    return indicator(a, b);
  }
  if (kind == "file") {
    auto p = load_table(std::string(args));
    p.source_ = std::string(args);
    return p;
  }
  fail(ErrorCode::parameter_domain, "unknown potential kind '" + std::string(kind) + "'");
}

double Potential::shape(double y) const {
  switch (kind_) {
    case Kind::constant: return a_;
    case Kind::exponential: return a_ * std::exp(-b_ * y);
    case Kind::indicator: return y <= b_ ? a_ : 0.0;
    case Kind::tabulated: {
      const auto& xs = *xs_;
      const auto& vs = *values_;
      if (y <= xs.front()) return vs.front();
      if (y >= xs.back()) return vs.back();
      const auto it = std::upper_bound(xs.begin(), xs.end(), y);
      const auto i = static_cast<std::size_t>(it - xs.begin());
      const double w = (y - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return (1.0 - w) * vs[i - 1] + w * vs[i];
    }
  }
  return 0.0;
}

double Potential::operator()(double x) const { return amplitude_ * shape(argument_scale_ * x) + offset_; }

std::pair<double, double> Potential::range() const {
  double lo = 0.0;
  double hi = 0.0;
  switch (kind_) {
    case Kind::constant: lo = hi = a_; break;
    case Kind::exponential:
      lo = b_ > 0.0 ? std::min(a_, 0.0) : a_;
      hi = b_ > 0.0 ? std::max(a_, 0.0) : a_;
      break;
    case Kind::indicator:
      lo = std::min(a_, 0.0);
      hi = std::max(a_, 0.0);
      break;
    case Kind::tabulated: {
      const auto [mn, mx] = std::minmax_element(values_->begin(), values_->end());
      lo = *mn;
      hi = *mx;
      break;
    }
  }
  if (amplitude_ < 0.0) std::swap(lo, hi);
  return {amplitude_ * lo + offset_, amplitude_ * hi + offset_};
}

double Potential::sup_norm() const {
  const auto [lo, hi] = range();
  return std::max(std::abs(lo), std::abs(hi));
}

double Potential::infimum() const { return range().first; }

double Potential::value_at_infinity() const {
  double tail = 0.0;
  switch (kind_) {
    case Kind::constant: tail = a_; break;
    case Kind::exponential: tail = b_ > 0.0 ? 0.0 : a_; break;
    case Kind::indicator: tail = 0.0; break;
    case Kind::tabulated: tail = values_->back(); break;
  }
  return amplitude_ * tail + offset_;
}

Potential Potential::rescaled(double lambda) const {
  require(lambda > 0.0, ErrorCode::parameter_domain, "rescaling needs lambda > 0");
  Potential p = *this;
  p.amplitude_ *= lambda;
  p.offset_ *= lambda;
  if (kind_ != Kind::constant) p.argument_scale_ *= std::sqrt(lambda);
  return p;
}

Potential Potential::scaled(double factor) const {
  Potential p = *this;
  p.amplitude_ *= factor;
  p.offset_ *= factor;
  return p;
}

Potential Potential::shifted(double delta) const {
  Potential p = *this;
  p.offset_ += delta;
  return p;
}

std::string Potential::describe() const {
  std::string base;
  switch (kind_) {
    case Kind::constant: base = "const:" + format_double(a_); break;
    case Kind::exponential: base = "exp:" + format_double(a_) + "," + format_double(b_); break;
    case Kind::indicator: base = "indicator:" + format_double(a_) + "," + format_double(b_); break;
    case Kind::tabulated: base = "file:" + (source_.empty() ? std::string("<table>") : source_); break;
  }
  if (amplitude_ != 1.0 || argument_scale_ != 1.0)
    base += " (amplitude " + format_double(amplitude_) + ", argument scale " + format_double(argument_scale_) + ")";
  if (offset_ != 0.0) base += " + " + format_double(offset_);
  return base;
}

}  // namespace grushin
