#pragma once

// Domain types shared by every module: truncated size distributions, moments,
// initial data and simulation configuration.
//
// Cluster sizes are 1-based at every interface. Storage is 0-based, so
// densities()[j - 1] is the density of clusters of size j.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace critcf {

class SizeDistribution {
 public:
  // All-zero distribution on sizes 1..truncation_n.
  explicit SizeDistribution(std::size_t truncation_n);

  // Takes densities for sizes 1..N (N = densities.size() >= 2). Entries and
  // gel_mass must be nonnegative and finite.
  explicit SizeDistribution(std::vector<double> densities, double gel_mass = 0.0);

  // Sparse constructor: {size, density} pairs on sizes 1..truncation_n.
  static SizeDistribution sparse(
      std::size_t truncation_n,
      std::initializer_list<std::pair<std::size_t, double>> entries);

  std::size_t truncation() const noexcept { return densities_.size(); }

  // Density of clusters of size j, 1 <= j <= truncation().
  double at(std::size_t j) const;

  std::span<const double> densities() const noexcept { return densities_; }

  // First-moment mass routed past the truncation size.
  double gel_mass() const noexcept { return gel_mass_; }

  friend bool operator==(const SizeDistribution&, const SizeDistribution&) = default;

 private:
  std::vector<double> densities_;
  double gel_mass_ = 0.0;
};

struct MomentVector {
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

// Finite-size moment sum_j j^order rho(j); gel mass is not included.
// order must be in {0, 1, 2, 3}.
double moment(std::span<const double> densities, int order);
double moment(const SizeDistribution& rho, int order);
MomentVector moments(const SizeDistribution& rho);

struct Monodisperse {
  std::size_t size = 1;
  double density = 0.0;
};

// rho(j) = c q^j with c fixed by the declared mass.
struct Geometric {
  double ratio = 0.5;
  double mass = 0.0;
};

struct ExplicitList {
  std::vector<double> densities;  // sizes 1..densities.size()
};

struct InitialDataSpec {
  std::variant<Monodisperse, Geometric, ExplicitList> kind;
  double declared_mass = 0.0;

  static InitialDataSpec monodisperse(std::size_t size, double density);
  static InitialDataSpec geometric(double ratio, double mass);
  static InitialDataSpec explicit_list(std::vector<double> densities);
};

// Parses "monodisperse:j0[:c]", "geometric:q" or "explicit:v1,v2,...".
// `mass` supplies the density for monodisperse without c and the mass for
// geometric; for the other kinds it must agree with the data when given.
InitialDataSpec parse_initial_data(std::string_view text, std::optional<double> mass);

std::string describe(const InitialDataSpec& spec);

// Realizes the spec on sizes 1..n. Throws ValidationError for q outside
// (0,1), negative explicit entries, or a truncated first moment that misses
// declared_mass by more than 1e-9 relative.
SizeDistribution build_initial(const InitialDataSpec& spec, std::size_t n);

enum class ConvolutionMode { direct, fft, automatic };

std::string_view to_string(ConvolutionMode mode);
ConvolutionMode parse_convolution_mode(std::string_view text);

struct SimulationConfig {
  std::size_t truncation_n = 512;
  double t_end = 20.0;
  std::size_t output_stride = 1;  // accepted steps between snapshots
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  ConvolutionMode convolution_mode = ConvolutionMode::automatic;
  unsigned threads = 1;

  void validate() const;
};

}  // namespace critcf
