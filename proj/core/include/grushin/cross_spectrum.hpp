#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "grushin/params.hpp"

namespace grushin {

struct CrossEntry {
  double mu = 0.0;
  int multiplicity = 1;

  friend bool operator==(const CrossEntry&, const CrossEntry&) = default;
};

/// Which closed-form cross manifold produced a spectrum; only used to decide
/// how products with trigonometric cross potentials are averaged.
enum class CrossShape { circle, torus, custom };

/// Distinct eigenvalues of Δ_M with multiplicities, plus the volume v_G(M).
/// Immutable after construction.
class CrossSpectrum {
 public:
  CrossSpectrum(std::vector<CrossEntry> entries, double volume, std::string label,
                CrossShape shape = CrossShape::custom);

  const std::vector<CrossEntry>& entries() const noexcept { return entries_; }
  double volume() const noexcept { return volume_; }
  const std::string& label() const noexcept { return label_; }
  CrossShape shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Σ multiplicities over entries with mu ≤ t.
  long long count_up_to(double t) const;
  /// Largest mu in the catalogue.
  double mu_max() const { return entries_.back().mu; }
  /// Smallest nonzero mu, or 0 if the spectrum is {0}.
  double first_nonzero_mu() const;
  /// c_M = (L^cl_{0,n} v_G(M))^{-2/n} of the one-term Weyl law μ_j ≈ c_M j^{2/n}.
  double weyl_scale(const GrushinParams& params) const;

  friend bool operator==(const CrossSpectrum& a, const CrossSpectrum& b) {
    return a.entries_ == b.entries_ && a.volume_ == b.volume_;
  }

 private:
  std::vector<CrossEntry> entries_;
  double volume_;
  std::string label_;
  CrossShape shape_;
};

/// Circle of the given length: {0 (×1)} ∪ {(2πj/L)² (×2)}, up to mu_max.
CrossSpectrum circle_spectrum(double length, double mu_max);

/// Flat torus [0,L1)×[0,L2) by lattice enumeration, up to mu_max.
CrossSpectrum torus_spectrum(double length1, double length2, double mu_max);

/// Reads the CSV schema `# volume=<float> label=<text>` then `mu,multiplicity` rows.
CrossSpectrum parse_cross_spectrum(std::istream& in);
CrossSpectrum load_cross_spectrum(const std::filesystem::path& path);

std::string to_csv(const CrossSpectrum& spectrum);

}  // namespace grushin
