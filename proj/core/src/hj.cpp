#include "critcf/hj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "critcf/csv.hpp"
#include "critcf/error.hpp"

namespace critcf {

namespace {

constexpr double kInitialBandSlack = 1e-9;

double singular_coefficient(double z) { return (1.0 + z) / (2.0 * (1.0 - z)); }

double theta(double x, std::size_t n) {
  return std::max(1.0 / static_cast<double>(n), std::expm1(x));
}

double band_excess(const TransformGrid& g) {
  const BandReport b = check_band(g);
  return std::max(b.max_below_zero, b.max_above_envelope);
}

void record_band(HJState& s) {
  const double excess = band_excess(s.grid);
  s.band_excess = std::max(s.band_excess, excess);
  if (excess > kBandTolerance) s.band_flagged = true;
}

[[noreturn]] void throw_cfl(const char* where, double dt, double limit) {
  std::ostringstream msg;
  msg.precision(17);
  msg << where << ": dt = " << dt << " exceeds the stable step " << limit;
  throw CflViolation(msg.str());
}

[[noreturn]] void throw_upwind(const char* where, double node, double speed) {
  std::ostringstream msg;
  msg.precision(17);
  msg << where << ": characteristic speed " << speed << " at node " << node
      << " has the wrong sign for the upwind stencil";
  throw NumericalError(msg.str());
}

void advance_G(HJState& s, double dt, std::vector<double>& next) {
  const auto& z = s.grid.nodes;
  const auto& g = s.grid.values;
  const double m = s.mass_m;
  const double dz = s.spacing();
  next.resize(g.size());

  const double eq = m - m * m;
  next[0] = eq + (g[0] - eq) * std::exp(-0.5 * dt);
  for (std::size_t j = 1; j < g.size(); ++j) {
    const double p = z[j] * (g[j] - g[j - 1]) / dz;
    const double speed = p + m + 0.5;
    if (speed < 0.0) throw_upwind("step_G", z[j], speed);
    const double h = 0.5 * (p + m) * (p + m + 1.0);
    next[j] = g[j] - dt * (h + singular_coefficient(z[j]) * g[j] - m);
  }
  s.grid.values.swap(next);
  s.time += dt;
  record_band(s);
}

void advance_F(HJState& s, double dt, std::vector<double>& next) {
  const auto& x = s.grid.nodes;
  const auto& f = s.grid.values;
  const double m = s.mass_m;
  const double dx = s.spacing();
  const std::size_t last = f.size() - 1;
  next.resize(f.size());

  next[0] = 0.0;
  for (std::size_t j = 1; j <= last; ++j) {
    const double right = j < last ? f[j + 1] : f[j];
    const double q = (right - f[j]) / dx;
    const double speed = q - m - 0.5;
    if (speed > 0.0) throw_upwind("step_F", x[j], speed);
    const double h = 0.5 * (q - m) * (q - m - 1.0);
    const double source = 0.5 * f[j] + f[j] / theta(x[j], s.cutoff_n) - m;
    double diffusion = 0.0;
    if (s.viscosity_eps > 0.0) {
      diffusion = s.viscosity_eps * viscosity_coefficient(x[j]) *
                  (right - 2.0 * f[j] + f[j - 1]) / (dx * dx);
    }
    next[j] = f[j] - dt * (h + source - diffusion);
  }
  s.grid.values.swap(next);
  s.time += dt;
  record_band(s);
}

template <class Stable, class Advance>
HJState evolve(HJState s, double t_final, const HJObserver& observer, Stable stable,
               Advance advance) {
  if (t_final < s.time) throw ValidationError("evolve: t_final is before the current time");
  std::vector<double> scratch;
  while (s.time < t_final) {
    double dt = stable(s);
    bool last = false;
    if (s.time + dt >= t_final) {
      dt = t_final - s.time;
      last = true;
    }
    if (dt <= 1e-15 * std::max(1.0, t_final)) {
      s.time = t_final;
      break;
    }
    advance(s, dt, scratch);
    if (last) s.time = t_final;
    if (observer) observer(s);
  }
  return s;
}

double sample_linear(const TransformGrid& g, double node) {
  const auto& nodes = g.nodes;
  if (node <= nodes.front()) return g.values.front();
  if (node >= nodes.back()) return g.values.back();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), node);
  const auto i = static_cast<std::size_t>(it - nodes.begin());
  const double w = (node - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
  return (1.0 - w) * g.values[i - 1] + w * g.values[i];
}

}  // namespace

HJState make_state(TransformGrid grid, double m, const HJParams& params) {
  if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("make_state: m must be > 0");
  if (!(params.cfl > 0.0 && params.cfl < 1.0)) throw ValidationError("make_state: cfl must lie in (0,1)");
  if (params.cutoff_n < 1) throw ValidationError("make_state: cutoff_n must be >= 1");
  if (!(params.viscosity_eps >= 0.0)) throw ValidationError("make_state: eps must be >= 0");
  if (grid.size() < 3 || grid.values.size() != grid.size()) {
    throw ValidationError("make_state: need at least 3 nodes with one value each");
  }
  if (grid.nodes.front() != 0.0) throw ValidationError("make_state: grid must start at 0");
  const double h = grid.nodes[1] - grid.nodes[0];
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid.nodes[i] - grid.nodes[i - 1] - h) > 1e-9 * h) {
      throw ValidationError("make_state: grid must be uniform");
    }
  }
  if (grid.variable == GridVariable::z && !(grid.nodes.back() < 1.0)) {
    throw ValidationError("make_state: z-grid must stop short of 1");
  }
  if (grid.variable == GridVariable::z && params.viscosity_eps > 0.0) {
    throw ValidationError("make_state: viscosity applies to the x-form only");
  }

  HJState s;
  s.mass_m = m;
  s.cutoff_n = params.cutoff_n;
  s.viscosity_eps = params.viscosity_eps;
  s.cfl = params.cfl;
  s.grid = std::move(grid);
  s.grid.mass_m = m;
  if (s.grid.variable == GridVariable::x && s.grid.values.front() != 0.0) {
    throw ValidationError("make_state: F(0) must be 0");
  }
  const double excess = band_excess(s.grid);
  if (excess > kInitialBandSlack * std::max(1.0, m)) {
    std::ostringstream msg;
    msg << "make_state: initial data leave the constraint band by " << excess;
    throw ValidationError(msg.str());
  }
  return s;
}

double viscosity_coefficient(double x) {
  if (x <= 1.0) return std::max(x, 0.0);
  if (x >= 3.0) return 2.0;
  const double s = x - 1.0;
  const double s3 = s * s * s;
  return 1.0 + s - 0.25 * s3 + 0.0625 * s3 * s;
}

double stable_dt_G(const HJState& s) {
  const auto& z = s.grid.nodes;
  const auto& g = s.grid.values;
  const double m = s.mass_m;
  const double dz = s.spacing();
  double rate = 0.5;  // exact integrator at z = 0 places no limit; keep dt finite
  for (std::size_t j = 1; j < g.size(); ++j) {
    const double p = z[j] * (g[j] - g[j - 1]) / dz;
    const double speed = std::max(p + m + 0.5, 0.0);
    rate = std::max(rate, speed * z[j] / dz + singular_coefficient(z[j]));
  }
  return s.cfl / rate;
}

double stable_dt_F(const HJState& s) {
  const auto& x = s.grid.nodes;
  const auto& f = s.grid.values;
  const double m = s.mass_m;
  const double dx = s.spacing();
  const std::size_t last = f.size() - 1;
  double rate = 0.0;
  for (std::size_t j = 1; j <= last; ++j) {
    const double right = j < last ? f[j + 1] : f[j];
    const double q = (right - f[j]) / dx;
    double r = std::abs(q - m - 0.5) / dx + 0.5 + 1.0 / theta(x[j], s.cutoff_n);
    if (s.viscosity_eps > 0.0) r += 2.0 * s.viscosity_eps * viscosity_coefficient(x[j]) / (dx * dx);
    rate = std::max(rate, r);
  }
  return s.cfl / rate;
}

HJState step_G(const HJState& s, double dt) {
  if (s.grid.variable != GridVariable::z) throw ValidationError("step_G: needs a z-grid");
  if (!(dt > 0.0)) throw ValidationError("step_G: dt must be > 0");
  const double limit = stable_dt_G(s);
  if (dt > limit * (1.0 + 1e-12)) throw_cfl("step_G", dt, limit);
  HJState out = s;
  std::vector<double> scratch;
  advance_G(out, dt, scratch);
  return out;
}

HJState step_F(const HJState& s, double dt) {
  if (s.grid.variable != GridVariable::x) throw ValidationError("step_F: needs an x-grid");
  if (!(dt > 0.0)) throw ValidationError("step_F: dt must be > 0");
  const double limit = stable_dt_F(s);
  if (dt > limit * (1.0 + 1e-12)) throw_cfl("step_F", dt, limit);
  HJState out = s;
  std::vector<double> scratch;
  advance_F(out, dt, scratch);
  return out;
}

HJState evolve_G(HJState s, double t_final, const HJObserver& observer) {
  if (s.grid.variable != GridVariable::z) throw ValidationError("evolve_G: needs a z-grid");
  return evolve(std::move(s), t_final, observer, stable_dt_G, advance_G);
}

HJState evolve_F(HJState s, double t_final, const HJObserver& observer) {
  if (s.grid.variable != GridVariable::x) throw ValidationError("evolve_F: needs an x-grid");
  return evolve(std::move(s), t_final, observer, stable_dt_F, advance_F);
}

double stationary_residual_G(const TransformGrid& grid, double m) {
  if (grid.variable != GridVariable::z) {
    throw ValidationError("stationary_residual_G: needs a z-grid");
  }
  const auto& z = grid.nodes;
  const auto& g = grid.values;
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
    const double p = z[j] * (g[j + 1] - g[j - 1]) / (z[j + 1] - z[j - 1]);
    const double r = 0.5 * (p + m) * (p + m + 1.0) + singular_coefficient(z[j]) * g[j] - m;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double default_blowup_sigma(double m) { return 0.5 * (m - 1.0); }

double blowup_functional(const TransformGrid& grid, double sigma) {
  double phi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    phi = std::max(phi, grid.values[j] - sigma * grid.nodes[j]);
  }
  return phi;
}

SlopeReport slope_diagnostics(const TransformGrid& grid) {
  if (grid.size() < 3) throw ValidationError("slope_diagnostics: need at least 3 nodes");
  SlopeReport r;
  r.min_slope = std::numeric_limits<double>::infinity();
  r.max_slope = -std::numeric_limits<double>::infinity();
  r.max_second_difference = -std::numeric_limits<double>::infinity();
  const auto& x = grid.nodes;
  const auto& f = grid.values;
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double slope = (f[j + 1] - f[j]) / (x[j + 1] - x[j]);
    r.min_slope = std::min(r.min_slope, slope);
    r.max_slope = std::max(r.max_slope, slope);
  }
  for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
    const double h = 0.5 * (x[j + 1] - x[j - 1]);
    r.max_second_difference =
        std::max(r.max_second_difference, (f[j + 1] - 2.0 * f[j] + f[j - 1]) / (h * h));
  }
  return r;
}

OrderReport refine_and_estimate_order(const GridProblem& problem,
                                      std::span<const double> spacings) {
  if (spacings.size() < 3) throw ValidationError("refine_and_estimate_order: need >= 3 grids");
  const double ratio = spacings[0] / spacings[1];
  if (!(ratio > 1.0)) throw ValidationError("refine_and_estimate_order: spacings must decrease");
  for (std::size_t i = 1; i + 1 < spacings.size(); ++i) {
    if (std::abs(spacings[i] / spacings[i + 1] - ratio) > 1e-9 * ratio) {
      throw ValidationError("refine_and_estimate_order: spacings must be geometric");
    }
  }

  OrderReport r;
  r.spacings.assign(spacings.begin(), spacings.end());
  std::vector<TransformGrid> solutions;
  solutions.reserve(spacings.size());
  for (double h : spacings) solutions.push_back(problem(h));

  const TransformGrid& coarse = solutions.front();
  double scale = 0.0;
  for (double v : coarse.values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i + 1 < solutions.size(); ++i) {
    double d = 0.0;
    for (double node : coarse.nodes) {
      d = std::max(d, std::abs(sample_linear(solutions[i], node) -
                               sample_linear(solutions[i + 1], node)));
    }
    r.differences.push_back(d);
  }
  const double floor = 1e-12 * std::max(1.0, scale);
  r.degenerate = std::all_of(r.differences.begin(), r.differences.end(),
                             [floor](double d) { return d <= floor; });
  if (r.degenerate) return r;
  for (std::size_t i = 0; i + 1 < r.differences.size(); ++i) {
    r.orders.push_back(std::log(r.differences[i] / r.differences[i + 1]) / std::log(ratio));
  }
  r.observed_order = r.orders.back();
  return r;
}

GridProblem g_evolution_problem(const SizeDistribution& rho0, double t_final, double cfl) {
  return [rho0, t_final, cfl](double dz) {
    const auto nodes = z_grid_nodes(dz);
    const double m = moment(rho0, 1);
    HJParams params;
    params.cfl = cfl;
    HJState s = make_state(transform_G(rho0, nodes), m, params);
    return evolve_G(std::move(s), t_final).grid;
  };
}

GridProblem linear_advection_problem(double t_final, double cfl) {
  return [t_final, cfl](double h) {
    const auto cells = static_cast<std::size_t>(std::llround(1.0 / h));
    TransformGrid g{GridVariable::x, uniform_nodes(0.0, 1.0, cells + 1), {}, 0.0};
    const double dx = g.nodes[1] - g.nodes[0];
    for (double x : g.nodes) g.values.push_back(std::sin(2.0 * std::numbers::pi * x));
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / (cfl * dx)));
    const double dt = t_final / static_cast<double>(steps);
    const double nu = dt / dx;
    std::vector<double> next(g.size());
    for (std::size_t n = 1; n <= steps; ++n) {
      next[0] = std::sin(-2.0 * std::numbers::pi * dt * static_cast<double>(n));
      for (std::size_t j = 1; j < g.size(); ++j) {
        next[j] = g.values[j] - nu * (g.values[j] - g.values[j - 1]);
      }
      g.values.swap(next);
    }
    return g;
  };
}

GridProblem zero_stationary_problem(double t_final) {
  return [t_final](double dz) {
    const auto nodes = z_grid_nodes(dz);
    TransformGrid g{GridVariable::z, nodes, std::vector<double>(nodes.size(), 0.0), 1.0};
    return evolve_G(make_state(std::move(g), 1.0), t_final).grid;
  };
}

void write_snapshot_csv(std::ostream& out, const HJState& s) {
  out << "node,value,time\n";
  const std::string t = format_double(s.time);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    out << format_double(s.grid.nodes[i]) << ',' << format_double(s.grid.values[i]) << ',' << t
        << '\n';
  }
}

}  // namespace critcf
