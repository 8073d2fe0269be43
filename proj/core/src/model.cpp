#include "grushin/model.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "grushin/error.hpp"
#include "grushin/parallel.hpp"

namespace grushin {
namespace {

// V = c∞ + V' with V' → 0 at infinity; Tr(H + V − κ)₋ = Tr(H + V' − (κ − c∞))₋.
struct SplitPotential {
  double tail = 0.0;
  std::optional<Potential> decaying;

  explicit SplitPotential(const Potential& v) : tail(v.value_at_infinity()) {
    Potential rest = v.shifted(-tail);
    if (rest.sup_norm() > 0.0) decaying = rest;
  }
  double floor() const { return decaying ? std::min(0.0, decaying->infimum()) : 0.0; }
};

struct ModePlan {
  std::size_t j = 0;
  double mu = 0.0;
  int multiplicity = 1;
  Grid1D grid;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
};

// Common spacing resolving `energy`, snapped so that x_max is a grid end.
std::size_t global_points(const ModelOperator& model, double energy) {
  const double h = 2.0 * std::numbers::pi / (model.grid.nodes_per_wavelength * std::sqrt(std::max(energy, 1e-300)));
  const double n = std::ceil(model.x_max / h) - 1.0;
  if (!(n < static_cast<double>(model.grid.max_points)))
    fail(ErrorCode::resolution, "resolving energy " + format_double(energy) + " on [0, " + format_double(model.x_max) +
                                    "] needs more than " + std::to_string(model.grid.max_points) + " nodes");
  return static_cast<std::size_t>(std::max(1.0, n));
}

// Modes whose potential floor (plus the most negative value of V') lies below
// kappa, each on its Agmon-truncated support. The floor grows with μ, so the
// candidates form a prefix of the cross spectrum.
std::vector<ModePlan> plan_modes(const ModelOperator& model, double kappa, double v_floor, std::size_t n_total) {
  const double h = model.x_max / static_cast<double>(n_total + 1);
  const double energy = kappa - v_floor;
  std::vector<ModePlan> plans;
  const auto& entries = model.cross.entries();
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const double mu = entries[j].mu;
    if (mode_floor(model.params, mu) + v_floor >= kappa) break;
    ModePlan plan{j, mu, entries[j].multiplicity, Grid1D(model.x_max, n_total), model.right_bc};
    if (mu > 0.0) {
      const double cut = agmon_cut(model.params, mu, energy, model.grid.agmon_depth);
      const auto n = static_cast<std::size_t>(std::ceil(cut / h));
      if (n < n_total) {
        plan.grid = Grid1D(static_cast<double>(n + 1) * h, n);
        plan.bc = BoundaryCondition::dirichlet;
      }
    }
    plans.push_back(plan);
  }
  return plans;
}

struct ModeSolution {
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> vectors;
};

ModeSolution solve_mode(const ModelOperator& model, const ModePlan& plan, double kappa, bool want_vectors) {
  const auto t = discretize(model_potential(model.params, plan.mu), plan.grid, plan.bc);
  const double tol = default_tolerance(t);
  ModeSolution out;
  out.eigenvalues = eigenvalues_below(t, kappa, tol).eigenvalues;
  if (want_vectors) {
    out.vectors.reserve(out.eigenvalues.size());
    for (double e : out.eigenvalues) out.vectors.push_back(eigenfunction(t, e, tol));
  }
  return out;
}

void require_in_range(const EigenTable& table, double lambda) {
  if (!(lambda <= table.lambda_max))
    fail(ErrorCode::range, "lambda = " + format_double(lambda) + " above the table range " +
                               format_double(table.lambda_max));
}

// Tr(P_μ + V' − κ)₋ − Tr(P_μ − κ)₋ on one grid.
double trace_difference(const GrushinParams& params, double mu, const Potential& decaying, double kappa,
                        const Grid1D& grid) {
  const auto t0 = discretize(model_potential(params, mu), grid, BoundaryCondition::dirichlet);
  const auto tv = discretize(model_potential(params, mu, decaying), grid, BoundaryCondition::dirichlet);
  return trace_neg(tv, kappa) - trace_neg(t0, kappa);
}

double weighted_density(const std::vector<double>& phi, const std::vector<double>& weight) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double p2 = phi[i] * phi[i];
    num += p2 * weight[i];
    den += p2;
  }
  return num / den;
}

}  // namespace

ModelOperator::ModelOperator(GrushinParams params_, CrossSpectrum cross_, double x_max_, BoundaryCondition right_bc_,
                             GridPolicy grid_, unsigned workers_)
    : params(params_), cross(std::move(cross_)), x_max(x_max_), right_bc(right_bc_), grid(grid_), workers(workers_) {
  require(std::isfinite(x_max) && x_max > 0.0, ErrorCode::parameter_domain, "x_max must be positive");
  require(grid.nodes_per_wavelength >= 20.0, ErrorCode::parameter_domain,
          "grid policy needs at least 20 nodes per wavelength");
  require(grid.agmon_depth > 0.0, ErrorCode::parameter_domain, "Agmon depth must be positive");
}

double auto_strip_width(const GrushinParams& params, const CrossSpectrum& cross, double lambda_max) {
  const double mu1 = cross.first_nonzero_mu();
  require(mu1 > 0.0, ErrorCode::parameter_domain, "automatic x_max needs a nonzero cross eigenvalue");
  require(lambda_max > 0.0, ErrorCode::parameter_domain, "lambda_max must be positive");
  return 1.25 * std::pow(lambda_max / mu1, 1.0 / params.beta);
}

double mode_floor(const GrushinParams& params, double mu) {
  if (mu <= 0.0) return 0.0;
  const double c = params.c_beta;
  const double beta = params.beta;
  const double xs = std::pow(2.0 * c / (beta * mu), 1.0 / (beta + 2.0));
  return c / (xs * xs) * (1.0 + 2.0 / beta);
}

double required_mu_max(const GrushinParams& params, double lambda_max) {
  // the floor scales like μ^{2/(β+2)}
  return std::pow(lambda_max / mode_floor(params, 1.0), (params.beta + 2.0) / 2.0);
}

EigenTable assemble_spectrum(const ModelOperator& model, double lambda_max, bool want_vectors) {
  require(lambda_max > 0.0, ErrorCode::parameter_domain, "lambda_max must be positive");
  const std::size_t n_total = global_points(model, lambda_max);
  const auto plans = plan_modes(model, lambda_max, 0.0, n_total);
  auto solutions = parallel_map(model.workers, plans.size(),
                                [&](std::size_t i) { return solve_mode(model, plans[i], lambda_max, want_vectors); });

  EigenTable table;
  table.lambda_max = lambda_max;
  table.spacing = model.x_max / static_cast<double>(n_total + 1);
  std::size_t used = 0;
  while (used < plans.size() && !solutions[used].eigenvalues.empty()) ++used;
  if (used == model.cross.size())
    fail(ErrorCode::incomplete_table, "cross spectrum ends at mu = " + format_double(model.cross.mu_max()) +
                                          " but that mode still has eigenvalues below " + format_double(lambda_max));
  for (std::size_t i = 0; i < used; ++i) {
    const auto& plan = plans[i];
    table.modes.push_back({plan.j, plan.mu, plan.grid, plan.bc});
    auto& sol = solutions[i];
    for (std::size_t k = 0; k < sol.eigenvalues.size(); ++k) {
      table.entries.push_back({plan.j, k + 1, sol.eigenvalues[k], plan.multiplicity});
      if (want_vectors) table.vectors.push_back(std::move(sol.vectors[k]));
    }
  }
  return table;
}

long long counting_function(const EigenTable& table, double lambda) {
  require_in_range(table, lambda);
  long long n = 0;
  for (const auto& e : table.entries)
    if (e.lambda <= lambda) n += e.multiplicity;
  return n;
}

WeylFit weyl_fit(std::span<const double> lambdas, std::span<const double> counts) {
  require(lambdas.size() == counts.size(), ErrorCode::parameter_domain, "one count per lambda sample");
  require(lambdas.size() >= 3, ErrorCode::parameter_domain, "Weyl fit needs at least three samples");
  WeylFit fit;
  fit.lambdas.assign(lambdas.begin(), lambdas.end());
  fit.counts.assign(counts.begin(), counts.end());
  std::vector<double> x, y;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    require(lambdas[i] > 0.0, ErrorCode::parameter_domain, "Weyl fit needs positive lambdas");
    if (!(counts[i] > 0.0))
      fail(ErrorCode::range, "N(" + format_double(lambdas[i]) + ") = 0 cannot enter a log-log fit");
    x.push_back(std::log(lambdas[i]));
    y.push_back(std::log(counts[i]));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::parameter_domain, "Weyl fit needs distinct lambdas");
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.constant = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + fit.exponent * x[i]);
    fit.residuals.push_back(r);
    ss += r * r;
  }
  fit.exponent_stderr = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  return fit;
}

WeylFit weyl_fit(const EigenTable& table, std::span<const double> lambdas) {
  std::vector<double> counts;
  for (double l : lambdas) counts.push_back(static_cast<double>(counting_function(table, l)));
  return weyl_fit(lambdas, counts);
}

double riesz_mean(const EigenTable& table, double lambda) {
  require_in_range(table, lambda);
  double sum = 0.0;
  for (const auto& e : table.entries)
    if (e.lambda < lambda) sum += e.multiplicity * (lambda - e.lambda);
  return sum;
}

double counting_integral(const EigenTable& table, double lambda) {
  require_in_range(table, lambda);
  std::vector<std::pair<double, int>> steps;
  for (const auto& e : table.entries)
    if (e.lambda < lambda) steps.emplace_back(e.lambda, e.multiplicity);
  std::sort(steps.begin(), steps.end());
  double integral = 0.0;
  long long n = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    n += steps[i].second;
    const double next = i + 1 < steps.size() ? steps[i + 1].first : lambda;
    integral += static_cast<double>(n) * (next - steps[i].first);
  }
  return integral;
}

double trace_with_potential(const ModelOperator& model, double lambda, const Potential& v) {
  require(lambda > 0.0, ErrorCode::parameter_domain, "lambda must be positive");
  const SplitPotential split(v.rescaled(lambda));
  const double kappa = lambda - split.tail;
  const std::size_t n_total = global_points(model, lambda - split.floor());
  const auto plans = plan_modes(model, kappa, split.floor(), n_total);
  const auto traces = parallel_map(model.workers, plans.size(), [&](std::size_t i) {
    const auto t = discretize(model_potential(model.params, plans[i].mu, split.decaying), plans[i].grid, plans[i].bc);
    return trace_neg(t, kappa);
  });
  if (!plans.empty() && plans.size() == model.cross.size() && traces.back() > 0.0)
    fail(ErrorCode::incomplete_table, "cross spectrum exhausted before the mode cutoff at lambda = " +
                                          format_double(lambda));
  double sum = 0.0;
  for (std::size_t i = 0; i < plans.size(); ++i) sum += plans[i].multiplicity * traces[i];
  return sum;
}

Lemma1Result lemma1_rhs(const ReferenceSpectrum& ref, double cross_volume, const Potential& v,
                        const Lemma1Config& config) {
  const auto& params = ref.params;
  if (!params.supercritical())
    fail(ErrorCode::regime, "the trace-formula constant needs the supercritical regime nβ > 2");
  require(cross_volume > 0.0, ErrorCode::parameter_domain, "cross volume must be positive");
  require(config.octaves >= 1, ErrorCode::parameter_domain, "need at least one quadrature octave");
  const double d = params.d;
  const SplitPotential split(v);
  const double kappa = 1.0 - split.tail;
  const ZetaValue zeta = spectral_zeta(ref, d / 2.0);

  Lemma1Result result;
  // Σ_k ∫ (κ − s^{2/d}λ_k)₊ ds = κ^{(d+2)/2}·(2/(d+2))·ζ(d/2)
  result.closed_form = kappa > 0.0 ? 2.0 / (d + 2.0) * zeta.value * std::pow(kappa, (d + 2.0) / 2.0) : 0.0;

  const double reach = kappa - split.floor();
  if (split.decaying && reach > 0.0) {
    const double t_upper = std::sqrt(reach / ref.lambda(1));
    result.t_upper = t_upper;
    const Potential& decaying = *split.decaying;
    // D(t) at μ = t^{2d/n}, Richardson-extrapolated over (h, h/2)
    auto difference = [&](double t) {
      const double mu = std::pow(t, 2.0 * d / params.n);
      const Grid1D grid = half_line_grid(params, mu, decaying, kappa, config.half_line);
      const double coarse = trace_difference(params, mu, decaying, kappa, grid);
      const double fine = trace_difference(params, mu, decaying, kappa, grid.refined());
      return (4.0 * fine - coarse) / 3.0;
    };
    using Rule = boost::math::quadrature::gauss<double, 8>;
    struct Node {
      double t, weight;
      int pass;
    };
    std::vector<Node> nodes;
    const double t_min = t_upper / std::pow(2.0, static_cast<double>(config.octaves));
    nodes.push_back({t_min, 0.0, -1});
    for (int pass = 1; pass <= 2; ++pass) {
      for (std::size_t o = 0; o < config.octaves; ++o) {
        const double hi = t_upper / std::pow(2.0, static_cast<double>(o));
        const double lo = hi / 2.0;
        for (int piece = 0; piece < pass; ++piece) {
          const double a = lo + (hi - lo) * piece / pass;
          const double b = lo + (hi - lo) * (piece + 1) / pass;
          const double mid = 0.5 * (a + b);
          const double half = 0.5 * (b - a);
          const auto& x = Rule::abscissa();
          const auto& w = Rule::weights();
          // abscissae are stored for [0, 1]; the rule is symmetric
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double wi = w[i] * half;
            if (x[i] == 0.0) {
              nodes.push_back({mid, wi, pass});
            } else {
              nodes.push_back({mid - half * x[i], wi, pass});
              nodes.push_back({mid + half * x[i], wi, pass});
            }
          }
        }
      }
    }
    const auto values = parallel_map(config.workers, nodes.size(), [&](std::size_t i) { return difference(nodes[i].t); });
    result.nodes = nodes.size();
    // ∫_0^{t_min}: D is bounded near 0 for decaying V, so D(t_min)·t_min^d
    const double head = values[0] * std::pow(t_min, d);
    double pass_sum[3] = {0.0, head, head};
    for (std::size_t i = 1; i < nodes.size(); ++i)
      pass_sum[nodes[i].pass] += nodes[i].weight * values[i] * d * std::pow(nodes[i].t, d - 1.0);
    result.correction = pass_sum[2];
    const double scale = std::max(std::abs(result.closed_form + pass_sum[2]), std::abs(pass_sum[2]));
    result.quadrature_change = scale > 0.0 ? std::abs(pass_sum[2] - pass_sum[1]) / scale : 0.0;
    if (result.quadrature_change > config.rel_tol)
      fail(ErrorCode::quadrature, "trace-formula s-quadrature changed by " + format_double(result.quadrature_change) +
                                      " under panel doubling (tolerance " + format_double(config.rel_tol) + ")");
  }
  result.value = params.l_cl * cross_volume * (result.closed_form + result.correction);
  return result;
}

CrossPotential CrossPotential::parse(std::string_view descriptor) {
  const auto colon = descriptor.find(':');
  require(colon != std::string_view::npos, ErrorCode::parameter_domain,
          "cross potential must be const:<c> or cos:<m>, got '" + std::string(descriptor) + "'");
  const std::string kind(descriptor.substr(0, colon));
  const std::string arg(descriptor.substr(colon + 1));
  CrossPotential v;
  try {
    std::size_t used = 0;
    if (kind == "const") {
      v.kind = Kind::constant;
      v.c = std::stod(arg, &used);
    } else if (kind == "cos") {
      v.kind = Kind::cosine;
      v.m = std::stoi(arg, &used);
    } else {
      fail(ErrorCode::parameter_domain, "unknown cross potential kind '" + kind + "'");
    }
    if (used != arg.size()) throw std::invalid_argument(arg);
  } catch (const std::logic_error&) {
    fail(ErrorCode::parameter_domain, "bad argument in cross potential '" + std::string(descriptor) + "'");
  }
  require(v.kind != Kind::cosine || v.m >= 0, ErrorCode::parameter_domain, "cos:<m> needs m ≥ 0");
  return v;
}

std::string CrossPotential::describe() const {
  return kind == Kind::constant ? "const:" + format_double(c) : "cos:" + std::to_string(m);
}

double cross_average(const CrossPotential& v2, const CrossSpectrum& cross) {
  if (v2.kind == CrossPotential::Kind::constant) return v2.c;
  if (cross.shape() == CrossShape::custom)
    fail(ErrorCode::parameter_domain, "trigonometric cross potentials need a circle or torus cross section");
  return v2.m == 0 ? 1.0 : 0.0;
}

MomentReport density_moment(const EigenTable& table, const CrossSpectrum& cross, double lambda, const Potential& v1,
                            const CrossPotential& v2, const BoundaryProfile& b) {
  require_in_range(table, lambda);
  require(table.with_vectors(), ErrorCode::consistency, "density moments need a table with eigenvectors");
  const double w = cross_average(v2, cross);
  std::size_t longest = 0;
  for (const auto& m : table.modes) longest = std::max(longest, m.grid.n_points);
  std::vector<double> weight(longest);
  const double root = std::sqrt(lambda);
  for (std::size_t i = 0; i < longest; ++i) weight[i] = v1(root * table.spacing * static_cast<double>(i + 1));

  MomentReport r;
  r.lambda = lambda;
  double sum = 0.0;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& e = table.entries[i];
    if (e.lambda > lambda) continue;
    r.n_of_lambda += e.multiplicity;
    sum += e.multiplicity * weighted_density(table.vectors[i], weight) * w;
  }
  r.moment = r.n_of_lambda > 0 ? sum / static_cast<double>(r.n_of_lambda) : 0.0;
  r.target = profile_pairing(b, v1) * w;
  r.abs_gap = std::abs(r.moment - r.target);
  r.rel_gap = r.target != 0.0 ? r.abs_gap / std::abs(r.target) : r.abs_gap;
  return r;
}

double mass_capture(const EigenTable& table, double lambda, double l) {
  require_in_range(table, lambda);
  require(table.with_vectors(), ErrorCode::consistency, "mass capture needs a table with eigenvectors");
  require(l >= 0.0, ErrorCode::parameter_domain, "L must be nonnegative");
  const double x_cap = l / std::sqrt(lambda);
  std::size_t longest = 0;
  for (const auto& m : table.modes) longest = std::max(longest, m.grid.n_points);
  std::vector<double> inside(longest);
  for (std::size_t i = 0; i < longest; ++i) inside[i] = table.spacing * static_cast<double>(i + 1) <= x_cap ? 1.0 : 0.0;
  long long n = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& e = table.entries[i];
    if (e.lambda > lambda) continue;
    n += e.multiplicity;
    sum += e.multiplicity * weighted_density(table.vectors[i], inside);
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

HellmannFeynman hellmann_feynman(const ReferenceSpectrum& ref, double s, const Potential& v, double epsilon,
                                 const HalfLineOptions& options) {
  require(s > 0.0, ErrorCode::parameter_domain, "s must be positive");
  require(epsilon > 0.0, ErrorCode::parameter_domain, "epsilon must be positive");
  const auto& params = ref.params;
  const double mu = std::pow(s, 2.0 / params.n);
  const SplitPotential split(v.scaled(epsilon));
  const double window = 10.0 * epsilon * v.sup_norm();

  const Grid1D grid = half_line_grid(params, mu, split.decaying, 1.0 + window, options);
  const auto t0 = discretize(model_potential(params, mu), grid, BoundaryCondition::dirichlet);
  const double tol = default_tolerance(t0);
  const auto below = eigenvalues_below(t0, 1.0 + window, tol).eigenvalues;
  for (double e : below)
    if (std::abs(e - 1.0) < window)
      fail(ErrorCode::degeneracy, "eigenvalue " + format_double(e) + " lies within 10·ε‖V‖ = " + format_double(window) +
                                      " of the threshold 1");

  HellmannFeynman out;
  out.epsilon = epsilon;
  double base = 0.0;
  std::vector<double> vx(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) vx[i] = v(grid.node(i));
  for (double e : below) {
    if (e >= 1.0) continue;
    ++out.n_below;
    base += 1.0 - e;
    out.pairing_value += weighted_density(eigenfunction(t0, e, tol), vx);
  }
  double perturbed = 0.0;
  if (split.decaying) {
    const auto tv = discretize(model_potential(params, mu, split.decaying), grid, BoundaryCondition::dirichlet);
    perturbed = trace_neg(tv, 1.0 - split.tail);
  } else {
    // same eigenvalues, shifted threshold: no second bisection
    for (double e : below) perturbed += std::max(0.0, 1.0 - split.tail - e);
  }
  out.fd_value = (base - perturbed) / epsilon;
  out.gap = std::abs(out.fd_value - out.pairing_value);
  return out;
}

std::string table_csv(const EigenTable& table) {
  std::string out = "j,k,multiplicity,lambda\n";
  for (const auto& e : table.entries)
    out += std::to_string(e.j) + "," + std::to_string(e.k) + "," + std::to_string(e.multiplicity) + "," +
           format_double(e.lambda) + "\n";
  return out;
}

ordered_json to_json(const MomentReport& r) {
  ordered_json j;
  j["lambda"] = r.lambda;
  j["N"] = r.n_of_lambda;
  j["moment"] = r.moment;
  j["target"] = r.target;
  j["abs_gap"] = r.abs_gap;
  j["rel_gap"] = r.rel_gap;
  return j;
}

}  // namespace grushin
