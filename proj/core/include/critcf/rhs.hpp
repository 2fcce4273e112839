#pragma once

// Right-hand side of the discrete coagulation-fragmentation system with
// coagulation kernel a(j,k) = jk and fragmentation kernel b(j,k) = 1,
// truncated at size N. Coagulation products larger than N leave the finite
// system and are accounted for as gel mass flux.

#include <cstddef>
#include <span>
#include <vector>

#include "critcf/convolution.hpp"
#include "critcf/core.hpp"

namespace critcf {

struct RhsOutput {
  std::vector<double> d_densities;  // d rho(j)/dt, index j - 1
  double d_gel_mass = 0.0;          // first-moment flux past size N, >= 0
};

// Q_c: gain(j) = 1/2 sum_{k<j} (j-k) k rho(j-k) rho(k), loss(j) = -j rho(j) m1.
// The gel flux is closed by mass conservation, -sum_j j (gain + loss)(j).
RhsOutput coagulation(const SizeDistribution& rho, ConvolutionMode mode);

// Q_f: d(j) = -1/2 (j-1) rho(j) + sum_{k=1}^{N-j} rho(j+k). Conserves mass.
RhsOutput fragmentation(const SizeDistribution& rho);

RhsOutput rhs(const SizeDistribution& rho, ConvolutionMode mode);

// Allocation-free evaluator for repeated calls at a fixed truncation. Accepts
// arbitrary real vectors (the integrator's intermediate stages may dip below
// zero by rounding).
class RhsEvaluator {
 public:
  RhsEvaluator(std::size_t n, ConvolutionMode mode, unsigned threads = 1);

  std::size_t size() const noexcept { return n_; }
  ConvolutionMode mode() const noexcept { return conv_.mode(); }

  // Writes Q_c + Q_f into d and returns the gel mass flux.
  double evaluate(std::span<const double> rho, std::span<double> d);

  // Q_c only; returns the gel mass flux.
  double coagulation(std::span<const double> rho, std::span<double> d);

  // Q_f only.
  void fragmentation(std::span<const double> rho, std::span<double> d) const;

 private:
  std::size_t n_;
  SelfConvolver conv_;
  std::vector<double> weighted_;
  std::vector<double> conv_out_;
};

}  // namespace critcf
