#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace grushin::cli {

/// Flat key → value layer (config file or command line). Keys are the long
/// flag names without dashes.
using Layer = std::map<std::string, std::string>;

struct RunConfig {
  int n = 1;
  std::optional<std::string> beta;   ///< exact rational text, e.g. "3" or "2/3"
  std::optional<std::string> alpha;  ///< exact rational text
  std::string cross = "circle:6.283185307179586";
  std::optional<double> x_max;       ///< unset: automatic strip width
  std::string right_bc = "dirichlet";
  double nodes_per_wavelength = 40.0;
  std::size_t k_max = 200;
  double cert_tol = 1e-8;
  std::size_t t_points = 256;
  std::size_t s_octaves = 4;
  double s_tol = 1e-3;
  std::vector<double> lambdas{500.0, 1000.0, 2000.0, 4000.0};
  std::string v1 = "exp:1,1";
  std::string v2 = "const:1";
  std::optional<double> s;            ///< hf-check scale; unset: automatic
  std::vector<double> epsilons{1e-2, 5e-3, 2.5e-3};
  std::string kind = "reference";     ///< spectrum: reference | model
  unsigned workers = 1;
  std::string out = ".";
  std::string format = "both";
};

/// Every key accepted in config files and as --<key> flags.
const std::vector<std::string>& config_keys();

/// Applies one key to the config; unknown keys and malformed values raise
/// config errors.
void apply_key(RunConfig& config, const std::string& key, const std::string& value);

/// defaults < file < flags. Setting beta in a later layer clears alpha from
/// earlier ones and vice versa; a single layer may not set both.
RunConfig resolve_config(const Layer& file, const Layer& flags, unsigned default_workers);

/// Parses `key = value` lines; '#' starts a comment.
Layer parse_config_text(const std::string& text);
Layer load_config_file(const std::string& path);

void validate(const RunConfig& config);

}  // namespace grushin::cli
