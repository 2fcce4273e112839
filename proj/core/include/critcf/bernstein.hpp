#pragma once

// Discrete Bernstein transform F(x) = sum_j (1 - e^{-jx}) rho(j) and its
// generating-function form G(z) = F(-log z) = sum_l (1 - z^l) rho(l), density
// recovery from samples of G, and finite-difference sign diagnostics.
//
// Gel mass is excluded: both transforms range over finite sizes only, so
// G(0) = m0 and -G'(1-) = m1 of the finite part.

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "critcf/core.hpp"

namespace critcf {

enum class GridVariable { x, z };

struct TransformGrid {
  GridVariable variable = GridVariable::z;
  std::vector<double> nodes;   // increasing
  std::vector<double> values;  // one per node
  double mass_m = 0.0;

  std::size_t size() const noexcept { return nodes.size(); }
};

// count nodes lo, lo + step, ..., with step = (hi - lo) / (count - 1).
std::vector<double> uniform_nodes(double lo, double hi, std::size_t count);

// z-grid 0, dz, ..., 1 - dz (1/dz must be an integer up to rounding).
std::vector<double> z_grid_nodes(double dz);

// x-grid 0, dx, ..., x_max.
std::vector<double> x_grid_nodes(double dx, double x_max);

double transform_F_at(std::span<const double> densities, double x);

// Valid for z in (-1, 1]; negative z is used by the high-order extractor.
double transform_G_at(std::span<const double> densities, double z);

TransformGrid transform_F(const SizeDistribution& rho, std::span<const double> nodes);
TransformGrid transform_G(const SizeDistribution& rho, std::span<const double> nodes);

// Default finite-difference step for order l: 0.05 / l. Rounding in the l-th
// difference grows like 2^l eps / (l! h^l), so much smaller steps lose the
// O(h) bias under cancellation from l = 4 on.
double default_extraction_step(int l);

// rho(l) ~ -Delta_h^l G(0) / l!, with
//   Delta_h^l G(0) = sum_{j=0}^{l} (-1)^{l-j} C(l,j) G(jh).
// The bias is O(h). Needs nodes 0, h, ..., lh in the grid (matched to 1e-9 h);
// throws GridTooCoarse otherwise, and for l > kMaxDifferenceOrder, where
// differences are useless in double precision.
inline constexpr int kMaxDifferenceOrder = 8;
double extract_density(const TransformGrid& g, int l, double h);

// Same device on a sampled function. For l > kMaxDifferenceOrder the density
// comes from interpolating G at kChebyshevDegree + 1 Chebyshev points on
// [-kChebyshevRadius, kChebyshevRadius] and reading off the z^l coefficient
// (Bjorck-Pereyra solve of the Vandermonde system; h is ignored).
inline constexpr int kChebyshevDegree = 30;
inline constexpr double kChebyshevRadius = 0.7;
double extract_density(const std::function<double(double)>& g, int l, double h);

struct MonotonicityReport {
  double step = 0.0;
  double scale = 0.0;
  std::vector<int> orders;          // 1..k_max
  std::vector<double> worst;        // max over stencils of Delta_h^k G
  std::vector<double> worst_node;   // left end of the worst stencil
  std::vector<double> tolerance;    // 1e-8 k! h^k scale
  std::vector<std::size_t> stencils;  // number of stencils evaluated
  bool passed = true;

  bool order_passed(std::size_t index) const { return worst[index] <= tolerance[index]; }
};

// Forward differences Delta_h^k G(z) for k = 1..k_max on a uniform z-grid;
// h must be a multiple of the grid spacing. A stencil [z, z + kh] is used
// when k h < (1 - (z + kh)) / 2. scale = max |G| on the grid (1 if zero).
MonotonicityReport check_complete_monotonicity(const TransformGrid& g, int k_max, double h);

struct BandReport {
  double max_below_zero = 0.0;      // max(0, -value)
  double max_above_envelope = 0.0;  // max(0, value - envelope)
  double max_wrong_direction = 0.0; // largest step against the expected monotonicity
};

// x-form: 0 <= F <= m (1 - e^{-x}), nondecreasing.
// z-form: 0 <= G <= m (1 - z), nonincreasing.
BandReport check_band(const TransformGrid& g);

// Rows "node,value".
void write_grid_csv(std::ostream& out, const TransformGrid& g);

}  // namespace critcf
