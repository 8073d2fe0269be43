#include "grushin/cross_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>

#include "grushin/error.hpp"
#include "grushin/serialize.hpp"

namespace grushin {

CrossSpectrum::CrossSpectrum(std::vector<CrossEntry> entries, double volume, std::string label,
                             CrossShape shape)
    : entries_(std::move(entries)), volume_(volume), label_(std::move(label)), shape_(shape) {
  require(!entries_.empty(), ErrorCode::schema, "cross spectrum has no entries");
  require(std::isfinite(volume_) && volume_ > 0.0, ErrorCode::schema, "cross volume must be positive");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    require(std::isfinite(e.mu) && e.mu >= 0.0, ErrorCode::schema,
            "entry " + std::to_string(i) + ": mu must be a nonnegative real");
    require(e.multiplicity > 0, ErrorCode::schema,
            "entry " + std::to_string(i) + ": multiplicity must be positive");
    require(i == 0 || entries_[i - 1].mu < e.mu, ErrorCode::schema,
            "entry " + std::to_string(i) + ": mu not strictly increasing");
  }
}

long long CrossSpectrum::count_up_to(double t) const {
  long long total = 0;
  for (const auto& e : entries_) {
    if (e.mu > t) break;
    total += e.multiplicity;
  }
  return total;
}

double CrossSpectrum::first_nonzero_mu() const {
  for (const auto& e : entries_)
    if (e.mu > 0.0) return e.mu;
  return 0.0;
}

double CrossSpectrum::weyl_scale(const GrushinParams& params) const {
  return std::pow(params.l_cl * volume_, -2.0 / params.n);
}

CrossSpectrum circle_spectrum(double length, double mu_max) {
  require(std::isfinite(length) && length > 0.0, ErrorCode::parameter_domain, "circle length must be positive");
  const double base = 2.0 * std::numbers::pi / length;
  std::vector<CrossEntry> entries{{0.0, 1}};
  for (long long j = 1;; ++j) {
    const double mu = (base * j) * (base * j);
    if (mu > mu_max) break;
    entries.push_back({mu, 2});
  }
  return CrossSpectrum(std::move(entries), length, "circle:" + format_double(length), CrossShape::circle);
}

CrossSpectrum torus_spectrum(double length1, double length2, double mu_max) {
  require(std::isfinite(length1) && length1 > 0.0 && std::isfinite(length2) && length2 > 0.0,
          ErrorCode::parameter_domain, "torus side lengths must be positive");
  const double a1 = std::pow(2.0 * std::numbers::pi / length1, 2);
  const double a2 = std::pow(2.0 * std::numbers::pi / length2, 2);
  const long long k1max = mu_max >= 0.0 ? static_cast<long long>(std::sqrt(mu_max / a1)) + 1 : 0;
  const long long k2max = mu_max >= 0.0 ? static_cast<long long>(std::sqrt(mu_max / a2)) + 1 : 0;
  std::vector<double> values;
  for (long long k1 = -k1max; k1 <= k1max; ++k1)
    for (long long k2 = -k2max; k2 <= k2max; ++k2) {
      const double mu = a1 * static_cast<double>(k1 * k1) + a2 * static_cast<double>(k2 * k2);
      if (mu <= mu_max) values.push_back(mu);
    }
  std::sort(values.begin(), values.end());
  std::vector<CrossEntry> entries;
  for (double v : values) {
    // lattice sums that agree mathematically may differ in the last ulp
    if (!entries.empty() && v - entries.back().mu <= 1e-12 * std::max(1.0, v))
      ++entries.back().multiplicity;
    else
      entries.push_back({v, 1});
  }
  return CrossSpectrum(std::move(entries), length1 * length2,
                       "torus:" + format_double(length1) + "x" + format_double(length2), CrossShape::torus);
}

CrossSpectrum parse_cross_spectrum(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  double volume = -1.0;
  std::string label;
  bool have_header = false;
  std::vector<CrossEntry> entries;
  auto schema_error = [&](const std::string& what) {
    fail(ErrorCode::schema, "cross spectrum line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (have_header) schema_error("duplicate header");
      std::istringstream hs(line.substr(1));
      std::string token;
      while (hs >> token) {
        if (token.rfind("volume=", 0) == 0) {
          try {
            std::size_t used = 0;
            volume = std::stod(token.substr(7), &used);
            if (used != token.size() - 7) schema_error("bad volume '" + token + "'");
          } catch (const std::logic_error&) {
            schema_error("bad volume '" + token + "'");
          }
        } else if (token.rfind("label=", 0) == 0) {
          label = token.substr(6);
          std::string rest;
          std::getline(hs, rest);
          label += rest;
        }
      }
      have_header = true;
      continue;
    }
    if (!have_header) schema_error("data row before '# volume=' header");
    const auto comma = line.find(',');
    if (comma == std::string::npos) schema_error("expected 'mu,multiplicity'");
    CrossEntry e;
    try {
      std::size_t used = 0;
      const std::string mu_text = line.substr(0, comma);
      e.mu = std::stod(mu_text, &used);
      if (used != mu_text.size()) schema_error("bad mu '" + mu_text + "'");
      const std::string m_text = line.substr(comma + 1);
      const long long m = std::stoll(m_text, &used);
      if (used != m_text.size()) schema_error("bad multiplicity '" + m_text + "'");
      if (m <= 0) schema_error("multiplicity must be positive");
      e.multiplicity = static_cast<int>(m);
    } catch (const std::logic_error&) {
      schema_error("malformed row '" + line + "'");
    }
    if (!(e.mu >= 0.0)) schema_error("mu must be nonnegative");
    if (!entries.empty() && !(entries.back().mu < e.mu)) schema_error("entries not sorted strictly ascending");
    entries.push_back(e);
  }
  if (!have_header || volume < 0.0) {
    line_no = 1;
    schema_error("missing '# volume=<float>' header");
  }
  if (entries.empty()) schema_error("no entries");
  if (!(volume > 0.0)) {
    line_no = 1;
    schema_error("volume must be positive");
  }
  return CrossSpectrum(std::move(entries), volume, label.empty() ? "custom" : label, CrossShape::custom);
}

CrossSpectrum load_cross_spectrum(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open cross spectrum file " + path.string());
  return parse_cross_spectrum(in);
}

std::string to_csv(const CrossSpectrum& spectrum) {
  std::string out = "# volume=" + format_double(spectrum.volume()) + " label=" + spectrum.label() + "\n";
  for (const auto& e : spectrum.entries())
    out += format_double(e.mu) + "," + std::to_string(e.multiplicity) + "\n";
  return out;
}

}  // namespace grushin
