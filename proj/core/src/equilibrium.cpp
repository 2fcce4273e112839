#include "critcf/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "critcf/convolution.hpp"
#include "critcf/csv.hpp"
#include "critcf/error.hpp"

namespace critcf {

namespace {

constexpr std::size_t kBlock = 1024;

struct RecursionState {
  double m;
  std::vector<double> rho;       // index l - 1
  std::vector<double> weighted;  // l rho~(l)
  double prefix = 0.0;           // sum_{i<l} rho~(i)

  void emit(std::size_t l, double convolution) {
    const double lf = static_cast<double>(l);
    const double value =
        (2.0 * m * (1.0 - m) + convolution - 2.0 * prefix) / ((2.0 * m + 1.0) * lf + 1.0);
    rho[l - 1] = value;
    weighted[l - 1] = lf * value;
    prefix += value;
  }
};

void run_direct(RecursionState& st, std::size_t first, std::size_t last) {
  for (std::size_t l = first; l <= last; ++l) {
    double acc = 0.0;
    for (std::size_t i = 1; 2 * i < l; ++i) acc += st.weighted[i - 1] * st.weighted[l - i - 1];
    acc *= 2.0;
    if (l % 2 == 0) acc += st.weighted[l / 2 - 1] * st.weighted[l / 2 - 1];
    st.emit(l, acc);
  }
}

void run_blocked_fft(RecursionState& st, std::size_t length) {
  const std::size_t head = std::min(kBlock, length);
  run_direct(st, 1, head);
  if (head == length) return;

  SelfConvolver conv(length, ConvolutionMode::fft);
  std::vector<double> known(length, 0.0), full(length, 0.0);
  std::size_t start = head + 1;
  while (start <= length) {
    // Block [start, stop] with stop - start < start - 1, so every pair with an
    // index inside the block has its partner among the known sizes.
    const std::size_t stop = std::min(length, start + std::min(kBlock, start - 1) - 1);
    std::copy(st.weighted.begin(), st.weighted.begin() + static_cast<std::ptrdiff_t>(start - 1),
              known.begin());
    conv.convolve(known, full);
    for (std::size_t l = start; l <= stop; ++l) {
      double cross = 0.0;
      for (std::size_t i = start; i < l; ++i) cross += st.weighted[i - 1] * st.weighted[l - i - 1];
      st.emit(l, full[l - 1] + 2.0 * cross);
    }
    start = stop + 1;
  }
}

}  // namespace

EquilibriumTable recursion(double m, std::size_t length, RecursionMethod method) {
  if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("recursion: m must be > 0");
  if (length < 1) throw ValidationError("recursion: L must be >= 1");

  RecursionState st{m, std::vector<double>(length, 0.0), std::vector<double>(length, 0.0)};
  const bool use_fft = method == RecursionMethod::fft ||
                       (method == RecursionMethod::automatic && length > kRecursionFftThreshold);
  if (use_fft) {
    run_blocked_fft(st, length);
  } else {
    run_direct(st, 1, length);
  }

  EquilibriumTable table;
  table.mass_m = m;
  table.length = length;
  table.values = std::move(st.rho);
  for (std::size_t i = 0; i < length; ++i) {
    table.partial_m0 += table.values[i];
    table.partial_m1 += static_cast<double>(i + 1) * table.values[i];
  }
  return table;
}

std::string_view to_string(Existence e) {
  switch (e) {
    case Existence::exists_unique: return "exists_unique";
    case Existence::nonexistent: return "nonexistent";
    case Existence::conjectural: return "conjectural";
  }
  return "conjectural";
}

EquilibriumVerdict existence_verdict(double m, std::size_t length) {
  EquilibriumVerdict v;
  v.mass_m = m;
  v.length = length;
  v.table = recursion(m, length);

  const auto& values = v.table.values;
  const auto min_it = std::min_element(values.begin(), values.end());
  v.min_index = static_cast<std::size_t>(min_it - values.begin()) + 1;
  v.min_value = *min_it;
  v.all_nonnegative = v.min_value >= 0.0;

  if (m <= 0.5) {
    v.kind = Existence::exists_unique;
  } else if (m >= 1.0) {
    v.kind = Existence::nonexistent;
    const auto it = std::find_if(values.begin(), values.end(), [](double x) { return x <= 0.0; });
    if (it != values.end()) {
      v.witness_index = static_cast<std::size_t>(it - values.begin()) + 1;
      v.witness_value = *it;
    }
  } else {
    v.kind = Existence::conjectural;
  }
  return v;
}

EquilibriumValidation validate(const EquilibriumTable& table, const RhsOracle& oracle) {
  const double m = table.mass_m;
  if (!(m > 0.0 && m <= 0.5)) throw ValidationError("validate: requires m in (0, 1/2]");
  if (table.length < 2) throw ValidationError("validate: requires L >= 2");

  EquilibriumValidation r;
  const double target_m0 = m * (1.0 - m);
  r.m0_gap = std::abs(table.partial_m0 - target_m0);
  r.m1_gap = std::abs(table.partial_m1 - m);
  r.tail_mass = target_m0 - table.partial_m0;
  r.all_nonnegative = std::all_of(table.values.begin(), table.values.end(),
                                  [](double x) { return x >= 0.0; });

  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * target_m0;
  r.resolved_length = table.length;
  for (std::size_t l = 1; l <= table.length; ++l) {
    if (table.values[l - 1] <= floor) {
      r.resolved_length = l - 1;
      break;
    }
  }
  const std::size_t hi = r.resolved_length;
  const std::size_t lo = hi / 2;
  if (lo >= 1 && hi > lo && table.values[lo - 1] > 0.0 && table.values[hi - 1] > 0.0) {
    r.tail_decay_rate = -(std::log(table.values[hi - 1]) - std::log(table.values[lo - 1])) /
                        static_cast<double>(hi - lo);
  }

  if (!r.all_nonnegative) {
    throw ValidationError("validate: table has negative entries; it is not a distribution");
  }
  const SizeDistribution rho(table.values);
  const RhsOutput d = oracle ? oracle(rho) : rhs(rho, ConvolutionMode::automatic);
  r.residual_window = table.length / 2;
  for (std::size_t j = 0; j < r.residual_window; ++j) {
    r.rhs_residual = std::max(r.rhs_residual, std::abs(d.d_densities[j]));
  }
  return r;
}

void write_table_csv(std::ostream& out, const EquilibriumTable& table) {
  out << "l,rho_tilde\n";
  for (std::size_t l = 1; l <= table.length; ++l) {
    out << l << ',' << format_double(table.values[l - 1]) << '\n';
  }
}

}  // namespace critcf
