#include "critcf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "critcf/csv.hpp"
#include "critcf/error.hpp"

namespace critcf {

namespace {

constexpr double kRadicandSlack = 1e-14;

double radicand(double delta, double r) {
  return 0.25 + r * r * (1.0 - delta) * (1.0 - delta) + r * (1.0 - 3.0 * delta);
}

double checked_root(double delta, double r) {
  const double v = radicand(delta, r);
  if (v < -kRadicandSlack) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "verify_hpm: negative radicand " << v << " at delta = " << delta << ", r = " << r;
    throw DomainError(msg.str());
  }
  return std::sqrt(std::max(v, 0.0));
}

// sum_j g(j) (d rho / dt)(j) in weak form, on the truncated system.
double weak_rhs(std::span<const double> rho, std::span<const double> g) {
  const std::size_t n = rho.size();
  double coag = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double wj = static_cast<double>(j) * rho[j - 1];
    if (wj == 0.0) continue;
    double inner = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double gjk = j + k <= n ? g[j + k - 1] : 0.0;
      inner += (gjk - g[j - 1] - g[k - 1]) * static_cast<double>(k) * rho[k - 1];
    }
    coag += wj * inner;
  }
  double frag = 0.0;
  double prefix = 0.0;  // sum_{k<j} g(k)
  for (std::size_t j = 1; j <= n; ++j) {
    frag += (static_cast<double>(j - 1) * g[j - 1] - 2.0 * prefix) * rho[j - 1];
    prefix += g[j - 1];
  }
  return 0.5 * coag - 0.5 * frag;
}

}  // namespace

double m0_closed_form(double m, double m0_initial, double t) {
  if (t < 0.0) throw ValidationError("m0_closed_form: t must be >= 0");
  const double eq = m - m * m;
  return eq + std::exp(-0.5 * t) * (m0_initial - eq);
}

std::optional<double> gelation_time_bound(double m, double m0_initial) {
  if (!(m0_initial > 0.0)) throw ValidationError("gelation_time_bound: m0_initial must be > 0");
  if (m <= 1.0) return std::nullopt;
  const double c = m * m - m;
  return 2.0 * std::log((m0_initial + c) / c);
}

WeakFormSeries weak_form_residual(const Trajectory& traj, const SizeFunction& g) {
  WeakFormSeries out;
  if (traj.size() < 3) return out;
  const std::size_t n = traj.snapshots.front().truncation();
  std::vector<double> gv(n);
  for (std::size_t j = 1; j <= n; ++j) {
    gv[j - 1] = g(j);
    if (!std::isfinite(gv[j - 1])) throw ValidationError("weak_form_residual: g must be bounded");
  }

  std::vector<double> pairing(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto rho = traj.snapshots[i].densities();
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += gv[j] * rho[j];
    pairing[i] = s;
  }
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double h1 = traj.times[i] - traj.times[i - 1];
    const double h2 = traj.times[i + 1] - traj.times[i];
    if (!(h1 > 0.0 && h2 > 0.0)) continue;
    const double derivative = -h2 / (h1 * (h1 + h2)) * pairing[i - 1] +
                              (h2 - h1) / (h1 * h2) * pairing[i] +
                              h1 / (h2 * (h1 + h2)) * pairing[i + 1];
    out.times.push_back(traj.times[i]);
    out.residuals.push_back(derivative - weak_rhs(traj.snapshots[i].densities(), gv));
  }
  return out;
}

double h_minus(double delta, double r) {
  return -0.5 - r * (1.0 + delta) - checked_root(delta, r);
}

double h_plus(double delta, double r) {
  return -0.5 - r * (1.0 + delta) + checked_root(delta, r);
}

HpmReport verify_hpm(std::span<const double> delta_grid, std::span<const double> r_grid) {
  if (delta_grid.empty() || r_grid.empty()) throw ValidationError("verify_hpm: empty grid");
  HpmReport rep;
  rep.max_h_minus = -std::numeric_limits<double>::infinity();
  rep.min_h_plus = std::numeric_limits<double>::infinity();
  rep.min_radicand = std::numeric_limits<double>::infinity();
  for (double delta : delta_grid) {
    if (delta < 0.0 || delta > 0.5) throw ValidationError("verify_hpm: delta must lie in [0, 1/2]");
    for (double r : r_grid) {
      if (r < 0.0 || r > 1.0) throw ValidationError("verify_hpm: r must lie in [0, 1]");
      rep.min_radicand = std::min(rep.min_radicand, radicand(delta, r));
      const double lo = h_minus(delta, r);
      const double hi = h_plus(delta, r);
      if (lo > rep.max_h_minus) {
        rep.max_h_minus = lo;
        rep.max_h_minus_delta = delta;
        rep.max_h_minus_r = r;
      }
      if (hi < rep.min_h_plus) {
        rep.min_h_plus = hi;
        rep.min_h_plus_delta = delta;
        rep.min_h_plus_r = r;
      }
    }
  }
  rep.gap = std::abs(rep.max_h_minus + 1.0);
  rep.h_minus_passed = rep.gap <= 1e-12;
  rep.h_plus_passed = rep.min_h_plus > -1.0;
  return rep;
}

ConvergenceReport convergence_report(const Trajectory& traj, const EquilibriumTable& table,
                                     std::size_t k) {
  ConvergenceReport rep;
  if (traj.empty()) throw ValidationError("convergence_report: empty trajectory");
  const double mass = traj.initial_mass();
  if (std::abs(mass - table.mass_m) > 1e-9) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "convergence_report: trajectory mass " << mass << " differs from table mass "
        << table.mass_m;
    throw MassMismatch(msg.str());
  }
  if (k == 0) return rep;
  if (k > table.length || k > traj.snapshots.front().truncation()) {
    throw ValidationError("convergence_report: k exceeds the table or the truncation");
  }
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto rho = traj.snapshots[i].densities();
    double worst = 0.0;
    for (std::size_t l = 1; l <= k; ++l) {
      worst = std::max(worst, std::abs(rho[l - 1] - table.values[l - 1]));
    }
    rep.times.push_back(traj.times[i]);
    rep.sup_errors.push_back(worst);
  }
  rep.monotone_tail_flag = true;
  for (std::size_t i = rep.sup_errors.size() / 2; i + 1 < rep.sup_errors.size(); ++i) {
    if (rep.sup_errors[i + 1] > rep.sup_errors[i] + 1e-9) {
      rep.monotone_tail_flag = false;
      break;
    }
  }
  return rep;
}

void write_weak_form_csv(std::ostream& out, const WeakFormSeries& series) {
  out << "t,residual\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    out << format_double(series.times[i]) << ',' << format_double(series.residuals[i]) << '\n';
  }
}

}  // namespace critcf
