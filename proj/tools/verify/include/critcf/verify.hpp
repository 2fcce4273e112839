#pragma once

// Property checks and acceptance criteria, shared by `critcf verify` and the
// acceptance test binary.

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "critcf/rhs.hpp"

namespace critcf::verify {

struct CheckResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::vector<std::string> details;  // one line per sub-check
  double seconds = 0.0;
};

struct Check {
  std::string id;
  std::string title;
  double budget_seconds = 0.0;  // 0: no runtime limit
  std::function<CheckResult()> run;
};

// Criteria 1..10, ids "criterion-1" .. "criterion-10".
std::vector<Check> acceptance_checks();

// Cheaper cross-module properties.
std::vector<Check> invariant_checks();

// "all", "acceptance", "invariants", or a single check id.
std::vector<Check> select_suite(std::string_view suite);

// Runs the check, times it and appends the runtime sub-check.
CheckResult run_check(const Check& check);

// Timing of rhs evaluations.
using RhsFunction = std::function<RhsOutput(const SizeDistribution&)>;

struct BenchOptions {
  std::vector<std::size_t> sizes{1024, 4096, 16384};
  std::vector<ConvolutionMode> modes{ConvolutionMode::direct, ConvolutionMode::fft};
  std::size_t repetitions = 7;
  unsigned threads = 1;
  // Replaces the fft path when set (fault injection in tests).
  RhsFunction fft_override;
};

struct BenchRow {
  std::size_t size = 0;
  ConvolutionMode mode = ConvolutionMode::direct;
  double median_seconds = 0.0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double cross_check_error = 0.0;  // normwise relative, fft vs direct
  // Smallest size at which fft is faster than direct (0 when never).
  std::size_t crossover = 0;
};

// Runs the direct-vs-fft cross-check at every size first and throws
// NumericalError if it exceeds 1e-12; timings are taken only afterwards.
BenchReport run_bench(const BenchOptions& options);

// max_j |a_j - b_j| / max_k scale_k, where scale_k sums the magnitudes of the
// gain, loss and fragmentation terms at size k. The gel flux difference is
// measured against m1^2 N.
double normwise_rhs_error(const SizeDistribution& rho, const RhsOutput& a, const RhsOutput& b);

}  // namespace critcf::verify
