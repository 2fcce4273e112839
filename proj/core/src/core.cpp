#include "critcf/core.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "critcf/error.hpp"

namespace critcf {

namespace {

void check_nonnegative(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      std::ostringstream msg;
      msg << what << ": entry for size " << i + 1 << " is " << values[i]
          << " (must be finite and >= 0)";
      throw ValidationError(msg.str());
    }
  }
}

double parse_double(std::string_view text, std::string_view what) {
  // std::from_chars for double is not available on every libstdc++ we target.
  std::string buf(text);
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(value)) {
    throw ValidationError("cannot parse " + std::string(what) + " from '" + buf + "'");
  }
  return value;
}

std::size_t parse_size(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0) {
    throw ValidationError("cannot parse positive " + std::string(what) + " from '" +
                          std::string(text) + "'");
  }
  return value;
}

bool relative_match(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace

SizeDistribution::SizeDistribution(std::size_t truncation_n)
    : densities_(truncation_n, 0.0) {
  if (truncation_n < 2) {
    throw ValidationError("SizeDistribution: truncation_n must be >= 2");
  }
}

SizeDistribution::SizeDistribution(std::vector<double> densities, double gel_mass)
    : densities_(std::move(densities)), gel_mass_(gel_mass) {
  if (densities_.size() < 2) {
    throw ValidationError("SizeDistribution: truncation_n must be >= 2");
  }
  check_nonnegative(densities_, "SizeDistribution");
  if (!std::isfinite(gel_mass_) || gel_mass_ < 0.0) {
    throw ValidationError("SizeDistribution: gel_mass must be finite and >= 0");
  }
}

SizeDistribution SizeDistribution::sparse(
    std::size_t truncation_n,
    std::initializer_list<std::pair<std::size_t, double>> entries) {
  std::vector<double> values(truncation_n, 0.0);
  for (const auto& [size, density] : entries) {
    if (size == 0 || size > truncation_n) {
      throw ValidationError("SizeDistribution::sparse: size out of range");
    }
    values[size - 1] = density;
  }
  return SizeDistribution(std::move(values));
}

double SizeDistribution::at(std::size_t j) const {
  if (j == 0 || j > densities_.size()) {
    throw std::out_of_range("SizeDistribution::at: size out of range");
  }
  return densities_[j - 1];
}

double moment(std::span<const double> densities, int order) {
  if (order < 0 || order > 3) {
    throw ValidationError("moment: order must be in {0,1,2,3}");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    const double j = static_cast<double>(i + 1);
    double weight = 1.0;
    for (int p = 0; p < order; ++p) weight *= j;
    sum += weight * densities[i];
  }
  return sum;
}

double moment(const SizeDistribution& rho, int order) {
  return moment(rho.densities(), order);
}

MomentVector moments(const SizeDistribution& rho) {
  return {moment(rho, 0), moment(rho, 1), moment(rho, 2)};
}

InitialDataSpec InitialDataSpec::monodisperse(std::size_t size, double density) {
  return {Monodisperse{size, density}, static_cast<double>(size) * density};
}

InitialDataSpec InitialDataSpec::geometric(double ratio, double mass) {
  return {Geometric{ratio, mass}, mass};
}

InitialDataSpec InitialDataSpec::explicit_list(std::vector<double> densities) {
  const double mass = moment(densities, 1);
  return {ExplicitList{std::move(densities)}, mass};
}

InitialDataSpec parse_initial_data(std::string_view text, std::optional<double> mass) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError("init: expected kind:params, got '" + std::string(text) + "'");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view params = text.substr(colon + 1);

  if (kind == "monodisperse") {
    const auto second = params.find(':');
    const std::size_t size = parse_size(params.substr(0, second), "monodisperse size");
    if (second == std::string_view::npos) {
      if (!mass) throw ValidationError("init monodisperse:j0 requires a mass");
      return InitialDataSpec::monodisperse(size, *mass / static_cast<double>(size));
    }
    auto spec = InitialDataSpec::monodisperse(
        size, parse_double(params.substr(second + 1), "monodisperse density"));
    if (mass && !relative_match(*mass, spec.declared_mass, 1e-12)) {
      throw ValidationError("init monodisperse: mass disagrees with j0*c");
    }
    return spec;
  }
  if (kind == "geometric") {
    if (!mass) throw ValidationError("init geometric:q requires a mass");
    return InitialDataSpec::geometric(parse_double(params, "geometric ratio"), *mass);
  }
  if (kind == "explicit") {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= params.size()) {
      const auto comma = params.find(',', start);
      const auto stop = comma == std::string_view::npos ? params.size() : comma;
      values.push_back(parse_double(params.substr(start, stop - start), "explicit density"));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    auto spec = InitialDataSpec::explicit_list(std::move(values));
    if (mass && !relative_match(*mass, spec.declared_mass, 1e-12)) {
      throw ValidationError("init explicit: mass disagrees with the list's first moment");
    }
    return spec;
  }
  throw ValidationError("init: unknown kind '" + std::string(kind) + "'");
}

std::string describe(const InitialDataSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&out](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Monodisperse>) {
          out << "monodisperse:" << k.size << ':' << k.density;
        } else if constexpr (std::is_same_v<K, Geometric>) {
          out << "geometric:" << k.ratio;
        } else {
          out << "explicit:";
          for (std::size_t i = 0; i < k.densities.size(); ++i) {
            out << (i ? "," : "") << k.densities[i];
          }
        }
      },
      spec.kind);
  return out.str();
}

SizeDistribution build_initial(const InitialDataSpec& spec, std::size_t n) {
  if (n < 2) throw ValidationError("build_initial: n must be >= 2");
  if (!std::isfinite(spec.declared_mass) || spec.declared_mass < 0.0) {
    throw ValidationError("build_initial: declared mass must be finite and >= 0");
  }
  std::vector<double> values(n, 0.0);

  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Monodisperse>) {
          if (k.size == 0 || k.size > n) {
            throw ValidationError("build_initial: monodisperse size outside 1..n");
          }
          if (!std::isfinite(k.density) || k.density < 0.0) {
            throw ValidationError("build_initial: monodisperse density must be >= 0");
          }
          values[k.size - 1] = k.density;
        } else if constexpr (std::is_same_v<K, Geometric>) {
          if (!(k.ratio > 0.0 && k.ratio < 1.0)) {
            throw ValidationError("build_initial: geometric ratio must lie in (0,1)");
          }
          // sum_j j q^j = q / (1-q)^2
          const double c = k.mass * (1.0 - k.ratio) * (1.0 - k.ratio) / k.ratio;
          double power = 1.0;
          for (std::size_t i = 0; i < n; ++i) {
            power *= k.ratio;
            values[i] = c * power;
          }
        } else {
          check_nonnegative(k.densities, "build_initial explicit list");
          if (k.densities.size() > n) {
            throw ValidationError("build_initial: explicit list longer than n");
          }
          std::copy(k.densities.begin(), k.densities.end(), values.begin());
        }
      },
      spec.kind);

  const double m1 = moment(values, 1);
  if (std::abs(m1 - spec.declared_mass) > 1e-9 * spec.declared_mass) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "build_initial: truncated first moment " << m1 << " misses declared mass "
        << spec.declared_mass << " (increase n)";
    throw ValidationError(msg.str());
  }
  return SizeDistribution(std::move(values));
}

std::string_view to_string(ConvolutionMode mode) {
  switch (mode) {
    case ConvolutionMode::direct: return "direct";
    case ConvolutionMode::fft: return "fft";
    case ConvolutionMode::automatic: return "auto";
  }
  return "auto";
}

ConvolutionMode parse_convolution_mode(std::string_view text) {
  if (text == "direct") return ConvolutionMode::direct;
  if (text == "fft") return ConvolutionMode::fft;
  if (text == "auto") return ConvolutionMode::automatic;
  throw ValidationError("mode must be one of direct, fft, auto");
}

void SimulationConfig::validate() const {
  if (truncation_n < 2) throw ValidationError("config: truncation_n must be >= 2");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("config: t_end must be > 0");
  if (output_stride == 0) throw ValidationError("config: output_stride must be >= 1");
  if (!(abs_tol > 0.0)) throw ValidationError("config: abs_tol must be > 0");
  if (!(rel_tol > 0.0)) throw ValidationError("config: rel_tol must be > 0");
  if (threads == 0) throw ValidationError("config: threads must be >= 1");
}

}  // namespace critcf
