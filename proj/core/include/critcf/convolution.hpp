#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "critcf/core.hpp"

namespace critcf {

// Sizes at or above this use the FFT path in ConvolutionMode::automatic.
inline constexpr std::size_t kAutoFftThreshold = 128;

ConvolutionMode resolve_mode(ConvolutionMode mode, std::size_t n);

// Discrete self-convolution over cluster sizes:
//   out[s-1] = sum_{k=1}^{s-1} x[k-1] * x[s-k-1]   for s = 1..n  (out[0] = 0).
//
// The FFT path zero-pads to a power of two >= 2n so the cyclic transform has
// no wrap-around. Plans are built with FFTW_ESTIMATE, so repeated runs are
// bit-identical. The direct path may split the output range across threads;
// each output is reduced in a fixed order, so the thread count does not
// change the result.
class SelfConvolver {
 public:
  SelfConvolver(std::size_t n, ConvolutionMode mode, unsigned threads = 1);
  ~SelfConvolver();
  SelfConvolver(SelfConvolver&&) noexcept;
  SelfConvolver& operator=(SelfConvolver&&) noexcept;
  SelfConvolver(const SelfConvolver&) = delete;
  SelfConvolver& operator=(const SelfConvolver&) = delete;

  std::size_t size() const noexcept { return n_; }
  ConvolutionMode mode() const noexcept { return mode_; }

  void convolve(std::span<const double> x, std::span<double> out);

 private:
  struct FftPlan;

  void convolve_direct(std::span<const double> x, std::span<double> out) const;
  void convolve_fft(std::span<const double> x, std::span<double> out);

  std::size_t n_ = 0;
  ConvolutionMode mode_ = ConvolutionMode::direct;
  unsigned threads_ = 1;
  std::unique_ptr<FftPlan> fft_;
};

// Convenience wrapper for one-off use; allocates a plan per call.
void self_convolve(std::span<const double> x, std::span<double> out, ConvolutionMode mode);

}  // namespace critcf
