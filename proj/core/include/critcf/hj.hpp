#pragma once

// Monotone finite-difference solvers for the two forms of the Hamilton-Jacobi
// equation satisfied by the transforms:
//
//   z-form  G_t + 1/2 (p + m)(p + m + 1) + (1+z)/(2(1-z)) G - m = 0,  p = z G_z
//   x-form  F_t + 1/2 (q - m)(q - m - 1) + F/2 + F/theta_n(x) - m = eps a(x) F_xx,
//           q = F_x,  theta_n(x) = max(1/n, e^x - 1),  F(0,t) = 0.
//
// Both are stepped with forward Euler and a fixed upwind stencil: a backward
// difference in z (H'(p) = p + m + 1/2 > 0), a forward difference in x
// (H'(q) = q - m - 1/2 < 0). The sign is checked at every node.

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "critcf/bernstein.hpp"
#include "critcf/core.hpp"

namespace critcf {

struct HJParams {
  std::size_t cutoff_n = 10000;
  double viscosity_eps = 0.0;
  double cfl = 0.5;
};

struct HJState {
  TransformGrid grid;
  double time = 0.0;
  double mass_m = 0.0;
  std::size_t cutoff_n = 10000;
  double viscosity_eps = 0.0;
  double cfl = 0.5;

  // Largest excursion outside the constraint band seen so far, and whether
  // it went beyond kBandTolerance.
  double band_excess = 0.0;
  bool band_flagged = false;

  double spacing() const { return grid.nodes[1] - grid.nodes[0]; }
};

inline constexpr double kBandTolerance = 1e-6;
inline constexpr double kDefaultXMax = 15.0;

// Checks the grid (uniform, starting at 0; z-grids must stop short of 1) and
// that the data lie in the band up to 1e-9. grid.mass_m is set to m.
HJState make_state(TransformGrid grid, double m, const HJParams& params = {});

// a(x) = x on [0,1], 1 + s - s^3/4 + s^4/16 with s = x - 1 on [1,3], 2 beyond.
double viscosity_coefficient(double x);

// Largest monotone forward-Euler step for the current data.
double stable_dt_G(const HJState& s);
double stable_dt_F(const HJState& s);

// One step. Throws CflViolation when dt exceeds the stable step.
HJState step_G(const HJState& s, double dt);
HJState step_F(const HJState& s, double dt);

using HJObserver = std::function<void(const HJState&)>;

// Steps to t_final with dt = stable step (last step shortened). The observer,
// if set, sees every accepted state.
HJState evolve_G(HJState s, double t_final, const HJObserver& observer = {});
HJState evolve_F(HJState s, double t_final, const HJObserver& observer = {});

// max over interior nodes of |1/2 (p+m)(p+m+1) + (1+z)/(2(1-z)) G - m| with
// centered p = z (G_{j+1} - G_{j-1}) / (2 dz).
double stationary_residual_G(const TransformGrid& grid, double m);

// phi = max_j (F_j - sigma x_j); sigma defaults to (m - 1)/2.
double blowup_functional(const TransformGrid& grid, double sigma);
double default_blowup_sigma(double m);

struct SlopeReport {
  double min_slope = 0.0;          // min forward difference
  double max_slope = 0.0;          // max forward difference
  double max_second_difference = 0.0;  // max centered second difference
};

// Discrete first and second derivatives on a uniform grid.
SlopeReport slope_diagnostics(const TransformGrid& grid);

struct OrderReport {
  std::vector<double> spacings;
  std::vector<double> differences;  // sup |u_h - u_{h/r}| at the coarsest nodes
  std::vector<double> orders;       // log(d_i / d_{i+1}) / log r
  double observed_order = 0.0;      // from the last triple
  bool degenerate = false;          // differences at rounding level
};

using GridProblem = std::function<TransformGrid(double spacing)>;

// Needs >= 3 spacings with a constant ratio r > 1 (coarsest first). Finer
// solutions are sampled at the coarsest nodes by linear interpolation.
OrderReport refine_and_estimate_order(const GridProblem& problem, std::span<const double> spacings);

// z-form evolution of transform_G(rho0) to t_final.
GridProblem g_evolution_problem(const SizeDistribution& rho0, double t_final, double cfl = 0.5);

// u_t + u_x = 0 on [0,1], u0 = sin(2 pi x), inflow u(0,t) = u0(-t), backward
// upwind with Courant number cfl.
GridProblem linear_advection_problem(double t_final, double cfl = 0.5);

// G = 0 with m = 1: an exact fixed point of the scheme.
GridProblem zero_stationary_problem(double t_final);

// Rows "node,value,time".
void write_snapshot_csv(std::ostream& out, const HJState& s);

}  // namespace critcf
