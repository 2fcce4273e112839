#include "critcf/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <thread>
#include <vector>

#include "critcf/error.hpp"

namespace critcf {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t padded_length(std::size_t n) {
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  return len;
}

}  // namespace

struct SelfConvolver::FftPlan {
  std::size_t length = 0;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit FftPlan(std::size_t len) : length(len) {
    real = fftw_alloc_real(len);
    spectrum = fftw_alloc_complex(len / 2 + 1);
    if (real == nullptr || spectrum == nullptr) {
      release();
      throw std::bad_alloc();
    }
    std::lock_guard lock(planner_mutex());
    const int ilen = static_cast<int>(len);
    forward = fftw_plan_dft_r2c_1d(ilen, real, spectrum, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(ilen, spectrum, real, FFTW_ESTIMATE);
  }

  ~FftPlan() { release(); }

  void release() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (real) fftw_free(real);
    if (spectrum) fftw_free(spectrum);
    forward = backward = nullptr;
    real = nullptr;
    spectrum = nullptr;
  }
};

ConvolutionMode resolve_mode(ConvolutionMode mode, std::size_t n) {
  if (mode != ConvolutionMode::automatic) return mode;
  return n >= kAutoFftThreshold ? ConvolutionMode::fft : ConvolutionMode::direct;
}

SelfConvolver::SelfConvolver(std::size_t n, ConvolutionMode mode, unsigned threads)
    : n_(n), mode_(resolve_mode(mode, n)), threads_(std::max(1u, threads)) {
  if (mode_ == ConvolutionMode::fft && n_ > 0) {
    fft_ = std::make_unique<FftPlan>(padded_length(n_));
  }
}

SelfConvolver::~SelfConvolver() = default;
SelfConvolver::SelfConvolver(SelfConvolver&&) noexcept = default;
SelfConvolver& SelfConvolver::operator=(SelfConvolver&&) noexcept = default;

void SelfConvolver::convolve(std::span<const double> x, std::span<double> out) {
  if (x.size() != n_ || out.size() != n_) {
    throw ValidationError("SelfConvolver: span sizes do not match the plan size");
  }
  if (n_ == 0) return;
  if (mode_ == ConvolutionMode::fft) {
    convolve_fft(x, out);
  } else {
    convolve_direct(x, out);
  }
}

void SelfConvolver::convolve_direct(std::span<const double> x, std::span<double> out) const {
  // out index i holds size s = i + 1; pairs (k, s-k) with 1 <= k < s.
  auto kernel = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n_; i += stride) {
      const std::size_t s = i + 1;
      double acc = 0.0;
      for (std::size_t k = 1; 2 * k < s; ++k) acc += x[k - 1] * x[s - k - 1];
      acc *= 2.0;
      if (s % 2 == 0) acc += x[s / 2 - 1] * x[s / 2 - 1];
      out[i] = acc;
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads_, n_ / 64 + 1));
  if (workers <= 1) {
    kernel(0, 1);
    return;
  }
  // Interleaved assignment balances the triangular workload.
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(kernel, w, workers);
  kernel(0, workers);
}

void SelfConvolver::convolve_fft(std::span<const double> x, std::span<double> out) {
  FftPlan& plan = *fft_;
  const std::size_t len = plan.length;
  // real[p] holds the value at size p + 1, so the product lands at index
  // (a-1) + (b-1) = s - 2.
  std::copy(x.begin(), x.end(), plan.real);
  std::fill(plan.real + n_, plan.real + len, 0.0);
  fftw_execute(plan.forward);
  const std::size_t bins = len / 2 + 1;
  for (std::size_t b = 0; b < bins; ++b) {
    const double re = plan.spectrum[b][0];
    const double im = plan.spectrum[b][1];
    plan.spectrum[b][0] = re * re - im * im;
    plan.spectrum[b][1] = 2.0 * re * im;
  }
  fftw_execute(plan.backward);
  const double scale = 1.0 / static_cast<double>(len);
  out[0] = 0.0;
  for (std::size_t i = 1; i < n_; ++i) out[i] = plan.real[i - 1] * scale;
  // A nonnegative sequence has a nonnegative self-convolution; clipping the
  // rounding noise below zero can only move outputs toward the exact value.
  if (std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0; })) {
    for (std::size_t i = 1; i < n_; ++i) out[i] = std::max(out[i], 0.0);
  }
}

void self_convolve(std::span<const double> x, std::span<double> out, ConvolutionMode mode) {
  SelfConvolver conv(x.size(), mode);
  conv.convolve(x, out);
}

}  // namespace critcf
