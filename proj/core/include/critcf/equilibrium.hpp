#pragma once

// Stationary solutions from the recursion
//
//   rho~(l) = [2m(1-m) + sum_{i<l} i(l-i) rho~(i) rho~(l-i) - 2 sum_{i<l} rho~(i)]
//             / ((2m+1) l + 1),
//
// computed in order l = 1, 2, ..., L.

#include <cstddef>
#include <functional>
#include <ostream>
#include <vector>

#include "critcf/core.hpp"
#include "critcf/rhs.hpp"

namespace critcf {

struct EquilibriumTable {
  double mass_m = 0.0;
  std::size_t length = 0;
  std::vector<double> values;  // index l - 1; may be negative for m >= 1
  double partial_m0 = 0.0;     // sum_l rho~(l)
  double partial_m1 = 0.0;     // sum_l l rho~(l)

  double at(std::size_t l) const { return values.at(l - 1); }
};

enum class RecursionMethod { direct, fft, automatic };

// Lengths above this use the blocked FFT convolution in automatic mode.
inline constexpr std::size_t kRecursionFftThreshold = 10000;

// Direct: O(L^2). FFT: the convolution of already-known terms is taken one
// block at a time with a zero-padded FFT, the in-block pairs directly.
EquilibriumTable recursion(double m, std::size_t length,
                           RecursionMethod method = RecursionMethod::automatic);

enum class Existence { exists_unique, nonexistent, conjectural };

std::string_view to_string(Existence e);

struct EquilibriumVerdict {
  Existence kind = Existence::conjectural;
  double mass_m = 0.0;
  std::size_t length = 0;
  // nonexistent: first l with rho~(l) <= 0 and its value.
  std::size_t witness_index = 0;
  double witness_value = 0.0;
  // Positivity scan over l <= length.
  bool all_nonnegative = true;
  std::size_t min_index = 0;
  double min_value = 0.0;
  EquilibriumTable table;
};

// m in (0, 1/2]: exists_unique. m >= 1: nonexistent. m in (1/2, 1): a scan
// only; no verdict is claimed.
EquilibriumVerdict existence_verdict(double m, std::size_t length);

struct EquilibriumValidation {
  double m0_gap = 0.0;  // |partial_m0 - m(1-m)|
  double m1_gap = 0.0;  // |partial_m1 - m|
  double tail_mass = 0.0;  // m(1-m) - partial_m0, signed
  // Largest l with rho~(l) above the rounding floor 64 eps m(1-m), and the
  // geometric decay rate fitted between l/2 and l.
  std::size_t resolved_length = 0;
  double tail_decay_rate = 0.0;
  std::size_t residual_window = 0;  // L / 2
  double rhs_residual = 0.0;        // max_{j <= L/2} |Q_c + Q_f|
  bool all_nonnegative = true;
};

using RhsOracle = std::function<RhsOutput(const SizeDistribution&)>;

// Requires m in (0, 1/2]. The default oracle is rhs(., automatic) at N = L.
EquilibriumValidation validate(const EquilibriumTable& table, const RhsOracle& oracle = {});

// Rows "l,rho_tilde".
void write_table_csv(std::ostream& out, const EquilibriumTable& table);

}  // namespace critcf
