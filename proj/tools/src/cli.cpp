#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "grushin/cross_spectrum.hpp"
#include "grushin/error.hpp"
#include "grushin/model.hpp"
#include "grushin/params.hpp"
#include "grushin/potential.hpp"
#include "grushin/profile.hpp"
#include "grushin/scaling.hpp"
#include "grushin/serialize.hpp"

namespace grushin::cli {
namespace {

struct Setup {
  GrushinParams params;
  std::optional<double> alpha;
};

// β = 2α/(2−α), kept exact so the critical case is decided on integers.
Rational beta_of_alpha(Rational alpha) {
  require(alpha.num > 0 && alpha.num < 2 * alpha.den, ErrorCode::parameter_domain, "alpha must lie in (0, 2)");
  std::int64_t num = 0, den = 0;
  require(!__builtin_mul_overflow(std::int64_t{2}, alpha.num, &num) &&
              !__builtin_mul_overflow(std::int64_t{2}, alpha.den, &den),
          ErrorCode::parameter_domain, "alpha numerator/denominator too large");
  den -= alpha.num;
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

Setup make_setup(const RunConfig& c) {
  validate(c);
  Setup s;
  if (c.alpha) {
    const Rational a = parse_rational(*c.alpha);
    s.params = derive_params(c.n, beta_of_alpha(a));
    s.alpha = a.value();
  } else {
    s.params = derive_params(c.n, parse_rational(*c.beta));
  }
  return s;
}

void require_supercritical(const GrushinParams& p) {
  require(p.supercritical(), ErrorCode::regime,
          "n*beta = " + format_double(p.n * p.beta) + " is not above 2; the boundary profile and zeta constant diverge");
}

double lambda_max(const RunConfig& c) { return c.lambdas.back(); }

double positive_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v) && v > 0.0) return v;
  } catch (const std::logic_error&) {
  }
  fail(ErrorCode::config, what + ": expected a positive number, got '" + text + "'");
}

CrossSpectrum make_cross(const std::string& descriptor, const GrushinParams& params, double lambda) {
  const auto colon = descriptor.find(':');
  require(colon != std::string::npos, ErrorCode::config, "--cross expects circle:L, torus:L1xL2 or file:path");
  const std::string kind = descriptor.substr(0, colon);
  const std::string arg = descriptor.substr(colon + 1);
  // closed-form catalogues must reach past the last mode that can hold an
  // eigenvalue below lambda, otherwise the table is incomplete
  const double mu_max = 1.01 * required_mu_max(params, lambda);
  if (kind == "circle") return circle_spectrum(positive_number(arg, "--cross circle"), mu_max);
  if (kind == "torus") {
    const auto x = arg.find('x');
    require(x != std::string::npos, ErrorCode::config, "--cross torus expects L1xL2");
    return torus_spectrum(positive_number(arg.substr(0, x), "--cross torus"),
                          positive_number(arg.substr(x + 1), "--cross torus"), mu_max);
  }
  if (kind == "file") return load_cross_spectrum(arg);
  fail(ErrorCode::config, "unknown cross model '" + kind + "'");
}

ReferenceSpectrum make_reference(const RunConfig& c, const GrushinParams& params) {
  ReferenceOptions opts;
  opts.workers = c.workers;
  const char* dir = std::getenv("GRUSHIN_CACHE_DIR");
  return cached_reference_spectrum(params, c.k_max, c.cert_tol, dir ? dir : "", opts);
}

struct Model {
  CrossSpectrum cross;
  ModelOperator op;
  EigenTable table;
};

Model make_model(const RunConfig& c, const GrushinParams& params, bool want_vectors) {
  const double lam = lambda_max(c);
  CrossSpectrum cross = make_cross(c.cross, params, lam);
  const double x_max = c.x_max.value_or(auto_strip_width(params, cross, lam));
  GridPolicy policy;
  policy.nodes_per_wavelength = c.nodes_per_wavelength;
  const auto bc = c.right_bc == "neumann" ? BoundaryCondition::neumann : BoundaryCondition::dirichlet;
  ModelOperator op(params, cross, x_max, bc, policy, c.workers);
  EigenTable table = assemble_spectrum(op, lam, want_vectors);
  return {std::move(cross), std::move(op), std::move(table)};
}

ordered_json params_json(const Setup& s) {
  ordered_json j;
  j["n"] = s.params.n;
  j["beta"] = s.params.beta;
  if (s.alpha) j["alpha"] = *s.alpha;
  j["c_beta"] = s.params.c_beta;
  j["d"] = s.params.d;
  j["l_cl"] = s.params.l_cl;
  j["regime"] = std::string(to_string(s.params.regime));
  j["weyl_exponent"] = s.params.d / 2.0;
  j["growth_exponent"] = s.params.growth_exponent();
  j["bessel_order"] = s.params.bessel_order();
  if (s.alpha) j["rate_exponent"] = 1.0 / (2.0 - *s.alpha);
  return j;
}

ordered_json model_json(const Model& m) {
  ordered_json j;
  j["n"] = m.op.params.n;
  j["beta"] = m.op.params.beta;
  j["cross"] = m.cross.label();
  j["volume"] = m.cross.volume();
  j["x_max"] = m.op.x_max;
  j["right_bc"] = m.op.right_bc == BoundaryCondition::neumann ? "neumann" : "dirichlet";
  j["lambda_max"] = m.table.lambda_max;
  j["spacing"] = m.table.spacing;
  j["entries"] = m.table.entries.size();
  j["modes"] = m.table.modes.size();
  return j;
}

std::string csv_line(std::initializer_list<std::string> fields) {
  std::string line;
  for (const auto& f : fields) {
    if (!line.empty()) line += ',';
    line += f;
  }
  return line + '\n';
}

std::string num(double v) { return format_double(v); }
std::string num(long long v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::vector<Artifact> cmd_params(const RunConfig& c) {
  return {{"params.json", emit_json(params_json(make_setup(c)))}};
}

std::vector<Artifact> cmd_spectrum(const RunConfig& c) {
  const Setup s = make_setup(c);
  if (c.kind == "model") {
    const Model m = make_model(c, s.params, false);
    ordered_json j = model_json(m);
    ordered_json rows = ordered_json::array();
    for (const auto& e : m.table.entries) rows.push_back(ordered_json::array({e.j, e.k, e.multiplicity, e.lambda}));
    j["columns"] = {"j", "k", "multiplicity", "lambda"};
    j["table"] = std::move(rows);
    return {{"table.csv", table_csv(m.table)}, {"table.json", emit_json(j)}};
  }
  const ReferenceSpectrum ref = make_reference(c, s.params);
  ordered_json j;
  j["n"] = ref.params.n;
  j["beta"] = ref.params.beta;
  j["k_max"] = ref.k_max;
  j["certificate_tol"] = ref.certificate_tol;
  j["discretization_error"] = ref.discretization_error;
  j["x_max"] = ref.x_max();
  j["n_points"] = ref.grid.n_points;
  j["eigenvalues"] = ref.eigenvalues;
  j["dn_gap"] = ref.dn_gap;
  std::string csv = "k,lambda,dn_gap\n";
  for (std::size_t k = 0; k < ref.size(); ++k) csv += csv_line({num(k + 1), num(ref.eigenvalues[k]), num(ref.dn_gap[k])});
  return {{"spectrum.csv", csv}, {"spectrum.json", emit_json(j)}};
}

std::vector<Artifact> cmd_profile(const RunConfig& c) {
  const Setup s = make_setup(c);
  require_supercritical(s.params);
  const ReferenceSpectrum ref = make_reference(c, s.params);
  ProfileQuadrature quad;
  quad.t_points = c.t_points;
  quad.workers = c.workers;
  const auto grid = default_profile_grid(ref);
  const BoundaryProfile b = compute_profile_B(ref, grid, quad);
  std::vector<Artifact> out{{"profile_B.csv", profile_csv(b)}, {"profile_B.json", emit_json(to_json(b))}};
  if (s.alpha) {
    const BoundaryProfile a = compute_profile_A(b, *s.alpha);
    out.push_back({"profile_A.csv", profile_csv(a)});
    out.push_back({"profile_A.json", emit_json(to_json(a))});
  }
  return out;
}

std::vector<Artifact> cmd_weyl(const RunConfig& c) {
  const Setup s = make_setup(c);
  require_supercritical(s.params);
  const Model m = make_model(c, s.params, false);
  const ReferenceSpectrum ref = make_reference(c, s.params);
  const WeylFit fit = weyl_fit(m.table, c.lambdas);
  const WeylConstant wc = weyl_constant(ref);
  const double predicted = wc.value * m.cross.volume();

  ordered_json j = model_json(m);
  j["slope"] = fit.exponent;
  j["slope_stderr"] = fit.exponent_stderr;
  j["expected_slope"] = s.params.d / 2.0;
  j["constant"] = fit.constant;
  j["zeta_constant"] = predicted;
  j["constant_ratio"] = fit.constant / predicted;
  j["lambdas"] = fit.lambdas;
  j["counts"] = fit.counts;
  j["residuals"] = fit.residuals;

  std::string csv = "lambda,N\n";
  for (std::size_t i = 0; i < fit.lambdas.size(); ++i)
    csv += csv_line({num(fit.lambdas[i]), num(static_cast<long long>(fit.counts[i]))});
  return {{"weyl.csv", csv}, {"weyl.json", emit_json(j)}};
}

std::vector<Artifact> cmd_riesz(const RunConfig& c) {
  const Setup s = make_setup(c);
  require_supercritical(s.params);
  const Model m = make_model(c, s.params, false);
  const ReferenceSpectrum ref = make_reference(c, s.params);
  const Potential v = Potential::parse(c.v1);
  const double d = s.params.d;
  const double zeta = spectral_zeta(ref, d / 2.0).value;
  const double free_target = s.params.l_cl * m.cross.volume() * (2.0 / (d + 2.0)) * zeta;

  Lemma1Config cfg;
  cfg.octaves = c.s_octaves;
  cfg.rel_tol = c.s_tol;
  cfg.half_line.nodes_per_wavelength = c.nodes_per_wavelength;
  cfg.workers = c.workers;
  const Lemma1Result rhs = lemma1_rhs(ref, m.cross.volume(), v, cfg);

  ordered_json rows = ordered_json::array();
  std::string csv = "lambda,riesz_mean,counting_integral,normalized_trace,normalized_trace_v\n";
  for (double lam : c.lambdas) {
    const double riesz = riesz_mean(m.table, lam);
    const double integral = counting_integral(m.table, lam);
    const double scale = std::pow(lam, -1.0 - d / 2.0);
    const double trace_v = trace_with_potential(m.op, lam, v) * scale;
    ordered_json r;
    r["lambda"] = lam;
    r["riesz_mean"] = riesz;
    r["counting_integral"] = integral;
    r["identity_gap"] = std::abs(riesz - integral) / std::max(1.0, std::abs(riesz));
    r["normalized_trace"] = riesz * scale;
    r["free_ratio"] = riesz * scale / free_target;
    r["normalized_trace_v"] = trace_v;
    r["potential_ratio"] = trace_v / rhs.value;
    rows.push_back(std::move(r));
    csv += csv_line({num(lam), num(riesz), num(integral), num(riesz * scale), num(trace_v)});
  }

  ordered_json j = model_json(m);
  j["potential"] = v.describe();
  j["free_target"] = free_target;
  j["lemma1_rhs"] = {{"value", rhs.value},
                     {"closed_form", rhs.closed_form},
                     {"correction", rhs.correction},
                     {"quadrature_change", rhs.quadrature_change},
                     {"t_upper", rhs.t_upper},
                     {"nodes", rhs.nodes}};
  j["rows"] = std::move(rows);
  return {{"riesz.csv", csv}, {"riesz.json", emit_json(j)}};
}

std::vector<Artifact> cmd_density(const RunConfig& c) {
  const Setup s = make_setup(c);
  require_supercritical(s.params);
  const ReferenceSpectrum ref = make_reference(c, s.params);
  ProfileQuadrature quad;
  quad.t_points = c.t_points;
  quad.workers = c.workers;
  const BoundaryProfile b = compute_profile_B(ref, default_profile_grid(ref), quad);
  const Model m = make_model(c, s.params, true);
  const Potential v1 = Potential::parse(c.v1);
  const CrossPotential v2 = CrossPotential::parse(c.v2);

  ordered_json reports = ordered_json::array();
  std::string csv = "lambda,N,moment,target,abs_gap,rel_gap\n";
  for (double lam : c.lambdas) {
    const MomentReport r = density_moment(m.table, m.cross, lam, v1, v2, b);
    reports.push_back(to_json(r));
    csv += csv_line({num(r.lambda), num(r.n_of_lambda), num(r.moment), num(r.target), num(r.abs_gap), num(r.rel_gap)});
  }

  static constexpr double quantiles[] = {0.5, 0.75, 0.9, 0.95, 0.99};
  ordered_json capture = ordered_json::array();
  std::string capture_csv = "lambda,quantile,L,captured\n";
  for (double lam : c.lambdas) {
    for (double q : quantiles) {
      const double l = profile_quantile(b, q);
      const double captured = mass_capture(m.table, lam, l);
      capture.push_back({{"lambda", lam}, {"quantile", q}, {"L", l}, {"captured", captured}});
      capture_csv += csv_line({num(lam), num(q), num(l), num(captured)});
    }
  }

  ordered_json j = model_json(m);
  j["v1"] = v1.describe();
  j["v2"] = v2.describe();
  j["profile_defect"] = b.normalization_defect;
  j["reports"] = std::move(reports);
  j["capture"] = std::move(capture);
  return {{"density.csv", csv}, {"capture.csv", capture_csv}, {"density.json", emit_json(j)}};
}

std::vector<Artifact> cmd_hf(const RunConfig& c) {
  const Setup s = make_setup(c);
  const ReferenceSpectrum ref = make_reference(c, s.params);
  const Potential v = Potential::parse(c.v1);
  // default scale keeps a couple of eigenvalues below 1 and well away from it
  const double scale = c.s.value_or(std::pow(0.4 / ref.lambda(1), s.params.d / 2.0));
  HalfLineOptions opts;
  opts.nodes_per_wavelength = c.nodes_per_wavelength;

  ordered_json rows = ordered_json::array();
  std::vector<double> gaps;
  std::string csv = "epsilon,fd_value,pairing_value,gap\n";
  for (double eps : c.epsilons) {
    const HellmannFeynman hf = hellmann_feynman(ref, scale, v, eps, opts);
    gaps.push_back(hf.gap);
    rows.push_back({{"epsilon", hf.epsilon},
                    {"fd_value", hf.fd_value},
                    {"pairing_value", hf.pairing_value},
                    {"gap", hf.gap},
                    {"n_below", hf.n_below}});
    csv += csv_line({num(hf.epsilon), num(hf.fd_value), num(hf.pairing_value), num(hf.gap)});
  }
  std::vector<double> ratios;
  for (std::size_t i = 1; i < gaps.size(); ++i) ratios.push_back(gaps[i - 1] > 0.0 ? gaps[i] / gaps[i - 1] : 0.0);

  ordered_json j;
  j["n"] = s.params.n;
  j["beta"] = s.params.beta;
  j["s"] = scale;
  j["potential"] = v.describe();
  j["rows"] = std::move(rows);
  j["gap_ratios"] = ratios;
  return {{"hf.csv", csv}, {"hf.json", emit_json(j)}};
}

bool wanted(const std::string& name, const std::string& format) {
  if (format == "both") return true;
  const auto dot = name.rfind('.');
  return dot != std::string::npos && name.substr(dot + 1) == format;
}

std::string error_json(const std::string& code, const std::string& message, int exit_code) {
  nlohmann::ordered_json j;
  j["error"] = {{"code", code}, {"message", message}, {"exit_code", exit_code}};
  return j.dump() + "\n";
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"params", "spectrum", "profile", "weyl", "riesz", "density", "hf-check"};
  return names;
}

std::vector<Artifact> run_subcommand(const std::string& subcommand, const RunConfig& config) {
  std::vector<Artifact> artifacts;
  if (subcommand == "params") artifacts = cmd_params(config);
  else if (subcommand == "spectrum") artifacts = cmd_spectrum(config);
  else if (subcommand == "profile") artifacts = cmd_profile(config);
  else if (subcommand == "weyl") artifacts = cmd_weyl(config);
  else if (subcommand == "riesz") artifacts = cmd_riesz(config);
  else if (subcommand == "density") artifacts = cmd_density(config);
  else if (subcommand == "hf-check") artifacts = cmd_hf(config);
  else fail(ErrorCode::config, "unknown subcommand '" + subcommand + "'");
  if (subcommand == "params") return artifacts;
  std::vector<Artifact> kept;
  for (auto& a : artifacts)
    if (wanted(a.name, config.format)) kept.push_back(std::move(a));
  return kept;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral asymptotics of Grushin-type boundary operators", "grushin"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "grushin 1.0.0");

  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& key : config_keys()) options[key] = app.add_option("--" + key, values[key]);
  options["n"]->description("cross dimension n");
  options["right-bc"]->description("dirichlet | neumann at x_max");
  options["nodes-per-wavelength"]->description("grid density, at least 20");
  options["k-max"]->description("reference eigenpairs to retain");
  options["cert-tol"]->description("Dirichlet/Neumann certificate tolerance");
  options["t-points"]->description("profile t-quadrature points per eigenpair");
  options["s-octaves"]->description("octave panels of the trace-formula quadrature");
  options["s-tol"]->description("allowed relative change under panel doubling");
  options["s"]->description("hf-check scale or 'auto'");
  options["workers"]->description("worker threads (default: available cores)");
  options["out"]->description("output directory");
  options["beta"]->description("exponent beta (decimal or p/q)");
  options["alpha"]->description("gas-planet exponent alpha in (0,2); sets beta = 2a/(2-a)");
  options["cross"]->description("circle:L | torus:L1xL2 | file:path");
  options["x-max"]->description("strip width or 'auto'");
  options["lambda"]->description("ascending comma-separated energies");
  options["v1"]->description("const:c | exp:a,b | indicator:a,b | file:path");
  options["v2"]->description("const:c | cos:m");
  options["epsilon"]->description("hf-check step sizes, comma-separated");
  options["kind"]->description("spectrum kind: reference | model");
  options["format"]->description("csv | json | both");
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file; flags override it");

  static const std::map<std::string, std::string> help{
      {"params", "print derived constants"},
      {"spectrum", "reference half-line spectrum or model eigenvalue table"},
      {"profile", "boundary profile B (and A when alpha is given)"},
      {"weyl", "counting function samples and power-law fit"},
      {"riesz", "Riesz means against the semiclassical trace formula"},
      {"density", "density moments and mass capture"},
      {"hf-check", "finite-difference vs pairing derivative of the trace"}};
  for (const auto& name : subcommands()) app.add_subcommand(name, help.at(name))->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what(), 2);
    out << app.help();
    return 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    Layer flags;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) flags[key] = values[key];
    const Layer file = config_path.empty() ? Layer{} : load_config_file(config_path);
    const unsigned hw = std::thread::hardware_concurrency();
    const RunConfig config = resolve_config(file, flags, hw == 0 ? 1 : hw);

    const auto artifacts = run_subcommand(sub, config);
    if (sub == "params") {
      out << artifacts.front().bytes;
      return 0;
    }
    const std::filesystem::path dir(config.out);
    try {
      std::filesystem::create_directories(dir);
    } catch (const std::filesystem::filesystem_error& e) {
      fail(ErrorCode::io, "cannot create output directory " + dir.string() + ": " + e.what());
    }
    for (const auto& a : artifacts) {
      write_file(dir / a.name, a.bytes);
      out << (dir / a.name).string() << '\n';
    }
    return 0;
  } catch (const Error& e) {
    const int code = is_validation_error(e.code()) ? 2 : 3;
    err << error_json(std::string(to_string(e.code())), e.what(), code);
    return code;
  } catch (const std::bad_alloc&) {
    err << error_json("resources", "out of memory", 3);
    return 3;
  } catch (const std::exception& e) {
    err << error_json("internal", e.what(), 3);
    return 3;
  }
}

}  // namespace grushin::cli
