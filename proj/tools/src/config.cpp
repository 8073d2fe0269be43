#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "grushin/error.hpp"
#include "grushin/params.hpp"

namespace grushin::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size() && std::isfinite(v)) return v;
  } catch (const std::logic_error&) {
  }
  fail(ErrorCode::config, "--" + key + " expects a number, got '" + value + "'");
}

long long to_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::logic_error&) {
  }
  fail(ErrorCode::config, "--" + key + " expects an integer, got '" + value + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  require(!out.empty(), ErrorCode::config, "--" + key + " expects a comma-separated list");
  return out;
}

std::size_t positive_size(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  require(v > 0, ErrorCode::config, "--" + key + " must be positive");
  return static_cast<std::size_t>(v);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "n",      "beta",     "alpha", "cross", "x-max",   "right-bc", "nodes-per-wavelength", "k-max",
      "cert-tol", "t-points", "s-octaves", "s-tol", "lambda", "v1", "v2", "s", "epsilon", "kind",
      "workers", "out",      "format"};
  return keys;
}

void apply_key(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "n") {
    const long long n = to_integer(key, value);
    require(n >= 1 && n <= 64, ErrorCode::config, "--n must lie in 1..64");
    c.n = static_cast<int>(n);
  } else if (key == "beta") {
    parse_rational(value);
    c.beta = value;
  } else if (key == "alpha") {
    parse_rational(value);
    c.alpha = value;
  } else if (key == "cross") {
    c.cross = value;
  } else if (key == "x-max") {
    if (value == "auto") c.x_max.reset();
    else c.x_max = to_double(key, value);
  } else if (key == "right-bc") {
    require(value == "dirichlet" || value == "neumann", ErrorCode::config, "--right-bc is dirichlet or neumann");
    c.right_bc = value;
  } else if (key == "nodes-per-wavelength") {
    c.nodes_per_wavelength = to_double(key, value);
  } else if (key == "k-max") {
    c.k_max = positive_size(key, value);
  } else if (key == "cert-tol") {
    c.cert_tol = to_double(key, value);
  } else if (key == "t-points") {
    c.t_points = positive_size(key, value);
  } else if (key == "s-octaves") {
    c.s_octaves = positive_size(key, value);
  } else if (key == "s-tol") {
    c.s_tol = to_double(key, value);
  } else if (key == "lambda") {
    c.lambdas = to_list(key, value);
  } else if (key == "v1") {
    c.v1 = value;
  } else if (key == "v2") {
    c.v2 = value;
  } else if (key == "s") {
    if (value == "auto") c.s.reset();
    else c.s = to_double(key, value);
  } else if (key == "epsilon") {
    c.epsilons = to_list(key, value);
  } else if (key == "kind") {
    require(value == "reference" || value == "model", ErrorCode::config, "--kind is reference or model");
    c.kind = value;
  } else if (key == "workers") {
    c.workers = static_cast<unsigned>(positive_size(key, value));
  } else if (key == "out") {
    c.out = value;
  } else if (key == "format") {
    require(value == "csv" || value == "json" || value == "both", ErrorCode::config, "--format is csv, json or both");
    c.format = value;
  } else {
    fail(ErrorCode::config, "unknown configuration key '" + key + "'");
  }
}

RunConfig resolve_config(const Layer& file, const Layer& flags, unsigned default_workers) {
  RunConfig c;
  c.workers = std::max(1u, default_workers);
  for (const Layer* layer : {&file, &flags}) {
    const bool has_beta = layer->count("beta") > 0;
    const bool has_alpha = layer->count("alpha") > 0;
    require(!(has_beta && has_alpha), ErrorCode::config, "give either beta or alpha, not both");
    if (has_beta) c.alpha.reset();
    if (has_alpha) c.beta.reset();
    for (const auto& [key, value] : *layer) apply_key(c, key, value);
  }
  return c;
}

Layer parse_config_text(const std::string& text) {
  Layer layer;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::config,
            "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const auto& keys = config_keys();
    require(std::find(keys.begin(), keys.end(), key) != keys.end(), ErrorCode::config,
            "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    layer[key] = trim(line.substr(eq + 1));
  }
  return layer;
}

Layer load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate(const RunConfig& c) {
  require(c.beta || c.alpha, ErrorCode::config, "give --beta or --alpha");
  require(!(c.beta && c.alpha), ErrorCode::config, "give either beta or alpha, not both");
  require(!c.x_max || *c.x_max > 0.0, ErrorCode::config, "--x-max must be positive");
  require(c.cert_tol > 0.0 && c.s_tol > 0.0, ErrorCode::config, "tolerances must be positive");
  require(c.nodes_per_wavelength >= 20.0, ErrorCode::config, "--nodes-per-wavelength must be at least 20");
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    require(c.lambdas[i] > 0.0, ErrorCode::config, "lambda values must be positive");
    require(i == 0 || c.lambdas[i] > c.lambdas[i - 1], ErrorCode::config, "lambda list must be ascending");
  }
  for (double e : c.epsilons) require(e > 0.0, ErrorCode::config, "epsilon values must be positive");
  require(!c.s || *c.s > 0.0, ErrorCode::config, "--s must be positive");
}

}  // namespace grushin::cli
