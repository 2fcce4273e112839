#include "critcf/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "critcf/csv.hpp"
#include "critcf/error.hpp"

namespace critcf {

namespace {

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Index of the node equal to `target` within 1e-9 * tol_scale, if any.
std::optional<std::size_t> find_node(std::span<const double> nodes, double target,
                                     double tol_scale) {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), target - 1e-9 * tol_scale);
  if (it == nodes.end() || std::abs(*it - target) > 1e-9 * tol_scale) return std::nullopt;
  return static_cast<std::size_t>(it - nodes.begin());
}

// Monomial coefficients of the interpolant through (x_i, f_i), i = 0..n.
std::vector<double> bjorck_pereyra(std::span<const double> x, std::vector<double> c) {
  const std::size_t n = x.size() - 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = n; j > k; --j) c[j] = (c[j] - c[j - 1]) / (x[j] - x[j - k - 1]);
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = k; j < n; ++j) c[j] -= x[k] * c[j + 1];
  }
  return c;
}

}  // namespace

std::vector<double> uniform_nodes(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw ValidationError("uniform_nodes: need count >= 2 and hi > lo");
  std::vector<double> nodes(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) nodes[i] = lo + step * static_cast<double>(i);
  nodes.back() = hi;
  return nodes;
}

std::vector<double> z_grid_nodes(double dz) {
  if (!(dz > 0.0 && dz < 0.5)) throw ValidationError("z_grid_nodes: dz must lie in (0, 1/2)");
  const double cells = 1.0 / dz;
  const auto count = static_cast<std::size_t>(std::llround(cells));
  if (std::abs(cells - static_cast<double>(count)) > 1e-6 * cells) {
    throw ValidationError("z_grid_nodes: 1/dz must be an integer");
  }
  std::vector<double> nodes(count);
  for (std::size_t i = 0; i < count; ++i) nodes[i] = static_cast<double>(i) / static_cast<double>(count);
  return nodes;
}

std::vector<double> x_grid_nodes(double dx, double x_max) {
  if (!(dx > 0.0) || !(x_max > dx)) throw ValidationError("x_grid_nodes: need 0 < dx < x_max");
  const auto cells = static_cast<std::size_t>(std::llround(x_max / dx));
  std::vector<double> nodes(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) nodes[i] = x_max * static_cast<double>(i) / static_cast<double>(cells);
  return nodes;
}

double transform_F_at(std::span<const double> densities, double x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    if (densities[i] == 0.0) continue;
    sum += -std::expm1(-static_cast<double>(i + 1) * x) * densities[i];
  }
  return sum;
}

double transform_G_at(std::span<const double> densities, double z) {
  double sum = 0.0;
  if (z > 0.0) {
    const double log_z = std::log(z);
    for (std::size_t i = 0; i < densities.size(); ++i) {
      if (densities[i] == 0.0) continue;
      sum += -std::expm1(static_cast<double>(i + 1) * log_z) * densities[i];
    }
    return sum;
  }
  double power = 1.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    power *= z;
    sum += (1.0 - power) * densities[i];
  }
  return sum;
}

TransformGrid transform_F(const SizeDistribution& rho, std::span<const double> nodes) {
  TransformGrid g{GridVariable::x, {nodes.begin(), nodes.end()}, {}, moment(rho, 1)};
  g.values.reserve(nodes.size());
  for (double x : nodes) {
    if (x < 0.0) throw ValidationError("transform_F: nodes must be >= 0");
    g.values.push_back(transform_F_at(rho.densities(), x));
  }
  return g;
}

TransformGrid transform_G(const SizeDistribution& rho, std::span<const double> nodes) {
  TransformGrid g{GridVariable::z, {nodes.begin(), nodes.end()}, {}, moment(rho, 1)};
  g.values.reserve(nodes.size());
  for (double z : nodes) {
    if (z < 0.0 || z > 1.0) throw ValidationError("transform_G: nodes must lie in [0,1]");
    g.values.push_back(transform_G_at(rho.densities(), z));
  }
  return g;
}

double default_extraction_step(int l) { return 0.05 / std::max(l, 1); }

double extract_density(const TransformGrid& g, int l, double h) {
  if (g.variable != GridVariable::z) throw ValidationError("extract_density: needs a z-grid");
  if (l < 1) throw ValidationError("extract_density: l must be >= 1");
  if (!(h > 0.0) || !(l * h < 0.5)) throw ValidationError("extract_density: need l h < 1/2");
  if (l > kMaxDifferenceOrder) {
    throw GridTooCoarse("extract_density: order " + std::to_string(l) +
                        " needs the sampled-function overload");
  }
  double diff = 0.0;
  for (int j = 0; j <= l; ++j) {
    const auto idx = find_node(g.nodes, j * h, h);
    if (!idx) {
      std::ostringstream msg;
      msg << "extract_density: grid has no node at " << j * h;
      throw GridTooCoarse(msg.str());
    }
    const double sign = ((l - j) % 2 == 0) ? 1.0 : -1.0;
    diff += sign * binomial(l, j) * g.values[*idx];
  }
  return -diff / (factorial(l) * std::pow(h, l));
}

double extract_density(const std::function<double(double)>& g, int l, double h) {
  if (l < 1) throw ValidationError("extract_density: l must be >= 1");
  if (l <= kMaxDifferenceOrder) {
    if (!(h > 0.0) || !(l * h < 0.5)) throw ValidationError("extract_density: need l h < 1/2");
    double diff = 0.0;
    for (int j = 0; j <= l; ++j) {
      const double sign = ((l - j) % 2 == 0) ? 1.0 : -1.0;
      diff += sign * binomial(l, j) * g(j * h);
    }
    return -diff / (factorial(l) * std::pow(h, l));
  }
  if (l > kChebyshevDegree) {
    throw GridTooCoarse("extract_density: order exceeds the interpolation degree");
  }
  const std::size_t count = kChebyshevDegree + 1;
  std::vector<double> x(count), f(count);
  for (std::size_t k = 0; k < count; ++k) {
    x[k] = -kChebyshevRadius *
           std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(count));
    f[k] = g(x[k]);
  }
  const auto coef = bjorck_pereyra(x, std::move(f));
  return -coef[static_cast<std::size_t>(l)];
}

MonotonicityReport check_complete_monotonicity(const TransformGrid& g, int k_max, double h) {
  if (g.variable != GridVariable::z) {
    throw ValidationError("check_complete_monotonicity: needs a z-grid");
  }
  if (k_max < 1 || g.size() < 2) throw ValidationError("check_complete_monotonicity: bad input");
  const double spacing = g.nodes[1] - g.nodes[0];
  const double ratio = h / spacing;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-6 * ratio) {
    throw ValidationError("check_complete_monotonicity: h must be a multiple of the grid spacing");
  }

  MonotonicityReport report;
  report.step = h;
  double scale = 0.0;
  for (double v : g.values) scale = std::max(scale, std::abs(v));
  report.scale = scale > 0.0 ? scale : 1.0;

  for (int k = 1; k <= k_max; ++k) {
    const double tol = 1e-8 * factorial(k) * std::pow(h, k) * report.scale;
    double worst = -std::numeric_limits<double>::infinity();
    double worst_node = std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const std::size_t span = static_cast<std::size_t>(k) * stride;
    for (std::size_t i = 0; i + span < g.size(); ++i) {
      const double z_end = g.nodes[i + span];
      if (!(k * h < 0.5 * (1.0 - z_end))) break;
      double diff = 0.0;
      for (int j = 0; j <= k; ++j) {
        const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
        diff += sign * binomial(k, j) * g.values[i + static_cast<std::size_t>(j) * stride];
      }
      ++used;
      if (diff > worst) {
        worst = diff;
        worst_node = g.nodes[i];
      }
    }
    report.orders.push_back(k);
    report.worst.push_back(used ? worst : 0.0);
    report.worst_node.push_back(worst_node);
    report.tolerance.push_back(tol);
    report.stencils.push_back(used);
    if (used && worst > tol) report.passed = false;
  }
  return report;
}

BandReport check_band(const TransformGrid& g) {
  BandReport r;
  const double m = g.mass_m;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = g.values[i];
    const double node = g.nodes[i];
    const double envelope = g.variable == GridVariable::x ? -m * std::expm1(-node) : m * (1.0 - node);
    r.max_below_zero = std::max(r.max_below_zero, -v);
    r.max_above_envelope = std::max(r.max_above_envelope, v - envelope);
    if (i > 0) {
      const double step = v - g.values[i - 1];
      const double wrong = g.variable == GridVariable::x ? -step : step;
      r.max_wrong_direction = std::max(r.max_wrong_direction, wrong);
    }
  }
  return r;
}

void write_grid_csv(std::ostream& out, const TransformGrid& g) {
  out << "node,value\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << format_double(g.nodes[i]) << ',' << format_double(g.values[i]) << '\n';
  }
}

}  // namespace critcf
