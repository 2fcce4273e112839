#include "critcf/rhs.hpp"

#include <algorithm>

#include "critcf/error.hpp"

namespace critcf {

RhsEvaluator::RhsEvaluator(std::size_t n, ConvolutionMode mode, unsigned threads)
    : n_(n), conv_(n, mode, threads), weighted_(n, 0.0), conv_out_(n, 0.0) {}

double RhsEvaluator::coagulation(std::span<const double> rho, std::span<double> d) {
  if (rho.size() != n_ || d.size() != n_) {
    throw ValidationError("RhsEvaluator: span sizes do not match the truncation");
  }
  double m1 = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    weighted_[i] = static_cast<double>(i + 1) * rho[i];
    m1 += weighted_[i];
  }
  conv_.convolve(weighted_, conv_out_);

  // Gel flux = -sum_j j (gain + loss) = m1 * m2 - sum_j j gain(j).
  double moment_gain = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double j = static_cast<double>(i + 1);
    const double gain = 0.5 * conv_out_[i];
    d[i] = gain - weighted_[i] * m1;
    moment_gain += j * gain;
    m2 += j * weighted_[i];
  }
  return std::max(0.0, m1 * m2 - moment_gain);
}

void RhsEvaluator::fragmentation(std::span<const double> rho, std::span<double> d) const {
  if (rho.size() != n_ || d.size() != n_) {
    throw ValidationError("RhsEvaluator: span sizes do not match the truncation");
  }
  // Backward pass: suffix holds sum_{i > j} rho(i).
  double suffix = 0.0;
  for (std::size_t i = n_; i-- > 0;) {
    d[i] = -0.5 * static_cast<double>(i) * rho[i] + suffix;
    suffix += rho[i];
  }
}

double RhsEvaluator::evaluate(std::span<const double> rho, std::span<double> d) {
  const double flux = coagulation(rho, d);
  double suffix = 0.0;
  for (std::size_t i = n_; i-- > 0;) {
    d[i] += -0.5 * static_cast<double>(i) * rho[i] + suffix;
    suffix += rho[i];
  }
  return flux;
}

RhsOutput coagulation(const SizeDistribution& rho, ConvolutionMode mode) {
  RhsEvaluator eval(rho.truncation(), mode);
  RhsOutput out{std::vector<double>(rho.truncation()), 0.0};
  out.d_gel_mass = eval.coagulation(rho.densities(), out.d_densities);
  return out;
}

RhsOutput fragmentation(const SizeDistribution& rho) {
  RhsEvaluator eval(rho.truncation(), ConvolutionMode::direct);
  RhsOutput out{std::vector<double>(rho.truncation()), 0.0};
  eval.fragmentation(rho.densities(), out.d_densities);
  return out;
}

RhsOutput rhs(const SizeDistribution& rho, ConvolutionMode mode) {
  RhsEvaluator eval(rho.truncation(), mode);
  RhsOutput out{std::vector<double>(rho.truncation()), 0.0};
  out.d_gel_mass = eval.evaluate(rho.densities(), out.d_densities);
  return out;
}

}  // namespace critcf
