#include "grushin/scaling.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "grushin/error.hpp"
#include "grushin/parallel.hpp"

namespace grushin {
namespace {

struct Candidate {
  std::vector<double> coarse, fine, neumann;
  std::vector<double> gap;
  double max_gap = 0.0;
};

Candidate solve_candidate(const PotentialSpec& pot, const Grid1D& coarse_grid, std::size_t k) {
  Candidate c;
  const Grid1D fine_grid = coarse_grid.refined();
  const auto tc = discretize(pot, coarse_grid, BoundaryCondition::dirichlet);
  const auto tf = discretize(pot, fine_grid, BoundaryCondition::dirichlet);
  const auto tn = discretize(pot, fine_grid, BoundaryCondition::neumann);
  c.coarse = lowest_eigenvalues(tc, k, default_tolerance(tc));
  c.fine = lowest_eigenvalues(tf, k, default_tolerance(tf));
  c.neumann = lowest_eigenvalues(tn, k, default_tolerance(tn));
  c.gap.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    c.gap[i] = std::abs(c.fine[i] - c.neumann[i]) / std::abs(c.fine[i]);
    c.max_gap = std::max(c.max_gap, c.gap[i]);
  }
  return c;
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-')) ch = '_';
  return s;
}

}  // namespace

double ReferenceSpectrum::lambda(std::size_t k) const {
  require(k >= 1 && k <= eigenvalues.size(), ErrorCode::range,
          "eigenvalue index " + std::to_string(k) + " outside 1.." + std::to_string(eigenvalues.size()));
  return eigenvalues[k - 1];
}

double ReferenceSpectrum::eigenfunction_value(std::size_t k, double x) const {
  require(k >= 1 && k <= eigenfunctions.size(), ErrorCode::range, "eigenfunction index out of range");
  if (x <= 0.0 || x >= grid.x_max) return 0.0;
  const auto& phi = eigenfunctions[k - 1];
  const double pos = x / grid.spacing();  // node i (0-based) sits at pos = i + 1
  const auto j = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(j);
  const double left = j == 0 ? 0.0 : phi[j - 1];
  const double right = j < phi.size() ? phi[j] : 0.0;
  return (1.0 - w) * left + w * right;
}

PotentialSpec model_potential(const GrushinParams& params, double mu, const std::optional<Potential>& extra) {
  PotentialSpec pot;
  pot.c_coef = params.c_beta;
  pot.mu = mu;
  pot.beta = params.beta;
  pot.extra = extra;
  return pot;
}

std::optional<std::pair<double, double>> turning_points(const GrushinParams& params, double mu, double energy) {
  require(mu > 0.0, ErrorCode::parameter_domain, "turning points need mu > 0");
  const double l2 = params.c_beta + 0.25;  // (ℓ+½)²
  const double beta = params.beta;
  auto f = [&](double x) { return l2 / (x * x) + mu * std::pow(x, beta) - energy; };
  const double xs = std::pow(2.0 * l2 / (beta * mu), 1.0 / (beta + 2.0));
  if (!(energy > 0.0) || f(xs) >= 0.0) return std::nullopt;
  auto root = [&](double lo, double hi) {
    // f(lo) and f(hi) have opposite signs
    const bool rising = f(lo) < 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      if ((f(mid) < 0.0) == rising) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double inner = root(std::sqrt(l2 / energy), xs);
  const double outer = root(xs, std::max(xs, std::pow(energy / mu, 1.0 / beta)));
  return std::make_pair(inner, outer);
}

double wkb_eigenvalue(const GrushinParams& params, double mu, std::size_t k) {
  require(k >= 1, ErrorCode::range, "eigenvalue index must be ≥ 1");
  const double l2 = params.c_beta + 0.25;
  const double beta = params.beta;
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto count = [&](double e) {
    const auto tp = turning_points(params, mu, e);
    if (!tp) return 0.0;
    auto g = [&](double x) { return std::sqrt(std::max(0.0, e - l2 / (x * x) - mu * std::pow(x, beta))); };
    return integrator.integrate(g, tp->first, tp->second) / std::numbers::pi;
  };
  const double target = static_cast<double>(k) - 0.5;
  const double xs = std::pow(2.0 * l2 / (beta * mu), 1.0 / (beta + 2.0));
  double lo = l2 / (xs * xs) + mu * std::pow(xs, beta);
  double hi = 2.0 * lo;
  while (count(hi) < target) hi *= 2.0;
  for (int i = 0; i < 100 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (count(mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double agmon_cut(const GrushinParams& params, double mu, double energy, double depth) {
  const double l2 = params.c_beta + 0.25;
  const double xs = std::pow(2.0 * l2 / (params.beta * mu), 1.0 / (params.beta + 2.0));
  const double bottom = l2 / (xs * xs) + mu * std::pow(xs, params.beta);
  const auto tp = turning_points(params, mu, std::max(energy, bottom * (1.0 + 1e-9) + 1e-300));
  double x = tp ? tp->second : xs;
  auto g = [&](double y) { return std::sqrt(std::max(0.0, params.c_beta / (y * y) + mu * std::pow(y, params.beta) - energy)); };
  const double dx = x / 512.0;
  double action = 0.0;
  double prev = g(x);
  while (action < depth) {
    const double cur = g(x + dx);
    action += 0.5 * (prev + cur) * dx;
    prev = cur;
    x += dx;
  }
  return x;
}

Grid1D half_line_grid(const GrushinParams& params, double mu, const std::optional<Potential>& extra, double kappa,
                      const HalfLineOptions& options) {
  require(mu > 0.0, ErrorCode::parameter_domain, "half-line solves need mu > 0 (no continuous spectrum handling)");
  // eigenfunctions below kappa decay wherever q > kappa − inf V
  const double energy = kappa - (extra ? std::min(0.0, extra->infimum()) : 0.0);
  const double x_cut = agmon_cut(params, mu, energy, options.agmon_depth);
  const auto pot = model_potential(params, mu, extra);
  std::size_t n = points_for_energy(pot, x_cut, energy, options.nodes_per_wavelength);
  n = std::max(n, options.min_points);
  if (n > options.max_points)
    fail(ErrorCode::resolution, "half-line grid for mu = " + format_double(mu) + " needs " + std::to_string(n) +
                                    " nodes, above the cap " + std::to_string(options.max_points));
  return Grid1D(x_cut, n);
}

ReferenceSpectrum reference_spectrum(const GrushinParams& params, std::size_t k_max, double certificate_tol,
                                     const ReferenceOptions& options) {
  require(k_max >= 1, ErrorCode::parameter_domain, "k_max must be at least 1");
  require(certificate_tol > 0.0, ErrorCode::parameter_domain, "certificate tolerance must be positive");
  require(options.turning_fraction > 0.0 && options.turning_fraction < 1.0, ErrorCode::parameter_domain,
          "turning fraction must lie in (0, 1)");

  const PotentialSpec pot = model_potential(params, 1.0);
  const double e_top = 1.02 * wkb_eigenvalue(params, 1.0, k_max) + 1.0;
  const double x0 = turning_points(params, 1.0, e_top)->second / options.turning_fraction;
  const std::size_t n0 = std::max(points_for_energy(pot, x0, e_top, options.nodes_per_wavelength), 4 * k_max);
  const double h = x0 / static_cast<double>(n0 + 1);

  auto grid_for = [&](int g) {
    const double target = x0 * std::pow(options.growth, g);
    const auto n = static_cast<std::size_t>(std::llround(target / h)) - 1;
    if (2 * n + 1 > options.max_points)
      fail(ErrorCode::resolution, "reference grid exceeds " + std::to_string(options.max_points) + " nodes");
    return Grid1D(static_cast<double>(n + 1) * h, n);
  };

  // Candidates are evaluated in batches of `workers`; the smallest certified
  // one wins, so the result does not depend on the batch size.
  std::optional<Candidate> chosen;
  Grid1D chosen_grid;
  double best_gap = std::numeric_limits<double>::infinity();
  const int batch = static_cast<int>(std::max(1u, options.workers));
  for (int first = 0; first < options.max_candidates && !chosen; first += batch) {
    const int last = std::min(options.max_candidates, first + batch);
    auto results = parallel_map(options.workers, static_cast<std::size_t>(last - first), [&](std::size_t i) {
      return solve_candidate(pot, grid_for(first + static_cast<int>(i)), k_max);
    });
    for (int g = first; g < last; ++g) {
      auto& c = results[static_cast<std::size_t>(g - first)];
      best_gap = std::min(best_gap, c.max_gap);
      if (c.max_gap <= certificate_tol) {
        chosen = std::move(c);
        chosen_grid = grid_for(g);
        break;
      }
    }
  }
  if (!chosen)
    fail(ErrorCode::truncation, "Dirichlet/Neumann certificate failed: best relative gap " + format_double(best_gap) +
                                    " > " + format_double(certificate_tol) + " after " +
                                    std::to_string(options.max_candidates) + " truncation lengths");

  ReferenceSpectrum ref;
  ref.params = params;
  ref.k_max = k_max;
  ref.certificate_tol = certificate_tol;
  ref.grid = chosen_grid.refined();
  ref.dn_gap = chosen->gap;
  ref.eigenvalues.resize(k_max);
  for (std::size_t i = 0; i < k_max; ++i) {
    const double ext = (4.0 * chosen->fine[i] - chosen->coarse[i]) / 3.0;
    ref.eigenvalues[i] = ext;
    ref.discretization_error =
        std::max(ref.discretization_error, std::abs(chosen->coarse[i] - chosen->fine[i]) / std::abs(ext));
    if (i > 0 && !(ext > ref.eigenvalues[i - 1]))
      fail(ErrorCode::consistency, "reference eigenvalues not strictly ascending at k = " + std::to_string(i + 1));
  }
  require(ref.eigenvalues.front() > 0.0, ErrorCode::consistency, "reference ground state must be positive");

  if (options.with_eigenfunctions) {
    const auto tf = discretize(pot, ref.grid, BoundaryCondition::dirichlet);
    const double tol = default_tolerance(tf);
    ref.eigenfunctions =
        parallel_map(options.workers, k_max, [&](std::size_t i) { return eigenfunction(tf, chosen->fine[i], tol); });
  }
  return ref;
}

double scaled_eigenvalue(const ReferenceSpectrum& ref, std::size_t k, double mu) {
  require(mu > 0.0, ErrorCode::parameter_domain, "mu must be positive");
  return std::pow(mu, 2.0 / (2.0 + ref.params.beta)) * ref.lambda(k);
}

CountResult n_s(const ReferenceSpectrum& ref, double kappa, double s) {
  require(s > 0.0, ErrorCode::parameter_domain, "s must be positive");
  const double factor = std::pow(s, 2.0 / ref.params.d);
  // eigenvalues ascend, so count by binary search on λ_k < kappa / factor
  const double threshold = kappa / factor;
  const auto it = std::lower_bound(ref.eigenvalues.begin(), ref.eigenvalues.end(), threshold);
  CountResult r;
  r.count = static_cast<std::size_t>(it - ref.eigenvalues.begin());
  // guard against the division rounding across an eigenvalue
  while (r.count > 0 && !(factor * ref.eigenvalues[r.count - 1] < kappa)) --r.count;
  while (r.count < ref.size() && factor * ref.eigenvalues[r.count] < kappa) ++r.count;
  r.inconclusive = r.count == ref.size();
  return r;
}

double cutoff_S(const ReferenceSpectrum& ref, double kappa) {
  require(kappa > 0.0, ErrorCode::parameter_domain, "cutoff needs kappa > 0");
  return std::pow(kappa / ref.lambda(1), ref.params.d / 2.0);
}

ordered_json to_json(const ReferenceSpectrum& ref) {
  ordered_json j;
  j["params"] = {{"n", ref.params.n}, {"beta", ref.params.beta}};
  j["k_max"] = ref.k_max;
  j["certificate_tol"] = ref.certificate_tol;
  j["discretization_error"] = ref.discretization_error;
  j["eigenvalues"] = ref.eigenvalues;
  j["dn_gap"] = ref.dn_gap;
  j["grid"] = {{"x_max", ref.grid.x_max}, {"n_points", ref.grid.n_points}};
  j["eigenfunctions"] = ref.eigenfunctions;
  return j;
}

ReferenceSpectrum reference_from_json(const ordered_json& doc) {
  try {
    ReferenceSpectrum ref;
    ref.params = derive_params(doc.at("params").at("n").get<int>(), doc.at("params").at("beta").get<double>());
    ref.k_max = doc.at("k_max").get<std::size_t>();
    ref.certificate_tol = doc.at("certificate_tol").get<double>();
    ref.discretization_error = doc.at("discretization_error").get<double>();
    ref.eigenvalues = doc.at("eigenvalues").get<std::vector<double>>();
    ref.dn_gap = doc.at("dn_gap").get<std::vector<double>>();
    ref.grid = Grid1D(doc.at("grid").at("x_max").get<double>(), doc.at("grid").at("n_points").get<std::size_t>());
    ref.eigenfunctions = doc.at("eigenfunctions").get<std::vector<std::vector<double>>>();
    require(ref.eigenvalues.size() == ref.k_max && ref.dn_gap.size() == ref.k_max, ErrorCode::schema,
            "reference spectrum arrays disagree with k_max");
    for (const auto& phi : ref.eigenfunctions)
      require(phi.size() == ref.grid.n_points, ErrorCode::schema, "eigenfunction length disagrees with grid");
    return ref;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::schema, std::string("malformed reference spectrum document: ") + e.what());
  }
}

ReferenceSpectrum cached_reference_spectrum(const GrushinParams& params, std::size_t k_max, double certificate_tol,
                                            const std::filesystem::path& cache_dir, const ReferenceOptions& options) {
  if (cache_dir.empty()) return reference_spectrum(params, k_max, certificate_tol, options);
  const auto path = cache_dir / sanitize("ref_n" + std::to_string(params.n) + "_beta" + format_double(params.beta) +
                                         "_k" + std::to_string(k_max) + "_tol" + format_double(certificate_tol) +
                                         ".json");
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto doc = ordered_json::parse(buf.str(), nullptr, false);
    if (!doc.is_discarded()) {
      try {
        auto ref = reference_from_json(doc);
        if (ref.params.n == params.n && ref.params.beta == params.beta && ref.k_max == k_max &&
            ref.certificate_tol == certificate_tol && !ref.eigenfunctions.empty())
          return ref;
      } catch (const Error&) {
        // stale or foreign file: recompute below
      }
    }
  }
  auto ref = reference_spectrum(params, k_max, certificate_tol, options);
  std::filesystem::create_directories(cache_dir);
  write_file(path, emit_json(to_json(ref)));
  return ref;
}

}  // namespace grushin
