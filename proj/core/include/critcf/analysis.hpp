#pragma once

// Closed-form references and diagnostics that tie simulations to the theory:
// the m0 law, the gelation time bound, weak-form residuals, the h+- scan and
// convergence to the stationary solution.

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "critcf/equilibrium.hpp"
#include "critcf/integrator.hpp"

namespace critcf {

// m0(t) = m - m^2 + e^{-t/2} (m0(0) - (m - m^2)).
double m0_closed_form(double m, double m0_initial, double t);

// Root of the m0 law for m > 1: 2 ln((m0(0) + m^2 - m) / (m^2 - m)).
std::optional<double> gelation_time_bound(double m, double m0_initial);

struct WeakFormSeries {
  std::vector<double> times;      // interior output times
  std::vector<double> residuals;  // d/dt sum g rho - weak right-hand side
};

using SizeFunction = std::function<double(std::size_t)>;

// Centered three-point differences on the (nonuniform) output times, minus
//   1/2 sum_{j,k} (g(j+k) - g(j) - g(k)) jk rho(j) rho(k)
//   - 1/2 sum_j sum_{k<j} (g(j) - g(k) - g(j-k)) rho(j)
// on the snapshot, with g(j+k) = 0 for j + k > N (those clusters become gel).
WeakFormSeries weak_form_residual(const Trajectory& traj, const SizeFunction& g);

// h_-(r), h_+(r) = -1/2 - r(1+delta) -+ sqrt(1/4 + r^2 (1-delta)^2 + r(1-3 delta)).
double h_minus(double delta, double r);
double h_plus(double delta, double r);

struct HpmReport {
  double max_h_minus = 0.0;
  double max_h_minus_delta = 0.0;
  double max_h_minus_r = 0.0;
  double gap = 0.0;  // |max h_- + 1|
  double min_h_plus = 0.0;
  double min_h_plus_delta = 0.0;
  double min_h_plus_r = 0.0;
  double min_radicand = 0.0;
  bool h_minus_passed = false;  // gap <= 1e-12
  bool h_plus_passed = false;   // min h_+ > -1
  bool passed() const { return h_minus_passed && h_plus_passed; }
};

// Scans every (delta, r) pair. Throws DomainError if a radicand is below
// -1e-14 (rounding around an exact zero is tolerated and clamped).
HpmReport verify_hpm(std::span<const double> delta_grid, std::span<const double> r_grid);

struct ConvergenceReport {
  std::vector<double> times;
  std::vector<double> sup_errors;  // max_{l <= k} |rho(l,t) - rho~(l)|
  bool monotone_tail_flag = false; // last half nonincreasing up to 1e-9
};

// Throws MassMismatch if the trajectory mass differs from table.mass_m by
// more than 1e-9.
ConvergenceReport convergence_report(const Trajectory& traj, const EquilibriumTable& table,
                                     std::size_t k);

// Rows "t,residual".
void write_weak_form_csv(std::ostream& out, const WeakFormSeries& series);

}  // namespace critcf
