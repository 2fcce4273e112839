#pragma once

// Adaptive time integration of the truncated coagulation-fragmentation system
// with the Dormand-Prince 5(4) pair and PI step-size control.

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "critcf/core.hpp"

namespace critcf {

struct Trajectory {
  std::vector<double> times;
  std::vector<SizeDistribution> snapshots;
  std::vector<MomentVector> moments;
  std::vector<double> gel_flux_series;

  // Mass added by clipping small negative components to zero, sum_j j |rho(j)|.
  double projected_mass = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;

  bool empty() const noexcept { return times.empty(); }
  std::size_t size() const noexcept { return times.size(); }

  // m1 + gel_mass of the first snapshot (0 when empty).
  double initial_mass() const noexcept;
};

// Local error per step is kept below abs_tol + rel_tol |y| componentwise
// (gel mass included as a component). Snapshots are stored at t = 0, every
// output_stride accepted steps, and at t_end exactly.
//
// Throws StepSizeUnderflow when the step drops below 1e-14 t_end and
// NegativityFailure when an accepted state has a component below -10 abs_tol.
Trajectory integrate(const SizeDistribution& rho0, const SimulationConfig& cfg);

// First snapshot time with gel_mass / initial_mass >= threshold.
std::optional<double> detect_gelation(const Trajectory& traj, double threshold);

// Columns t, m0, m1, m2, gel_mass, rho_1..rho_K.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t k = 32);

// Columns t, m0, m1, m2, gel_mass, gel_flux.
void write_moments_csv(std::ostream& out, const Trajectory& traj);

}  // namespace critcf
