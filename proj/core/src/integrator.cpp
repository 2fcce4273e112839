#include "critcf/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "critcf/csv.hpp"
#include "critcf/error.hpp"
#include "critcf/rhs.hpp"

namespace critcf {

namespace {

// Dormand-Prince 5(4) tableau. The system is autonomous, so the nodes c_i
// are not needed.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants (Hairer, Norsett & Wanner, DOPRI5).
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - 0.75 * kBeta;
constexpr double kSafety = 0.9;
constexpr double kMinShrink = 0.2;
constexpr double kMaxGrow = 10.0;

// The real stability interval of the pair ends near -3.3. Close to that edge
// the error control lets the fast-decaying large sizes carry noise of size
// abs_tol with either sign, so steps stay at 2 / lambda.
constexpr double kStabilityCap = 2.0;

class System {
 public:
  System(std::size_t n, ConvolutionMode mode, unsigned threads) : n_(n), eval_(n, mode, threads) {}

  std::size_t dim() const { return n_ + 1; }

  // y = [rho(1..N), gel_mass]. Returns the gel flux (same as dy[N]).
  double operator()(std::span<const double> y, std::span<double> dy) {
    ++evaluations;
    const double flux = eval_.evaluate(y.first(n_), dy.first(n_));
    dy[n_] = flux;
    return flux;
  }

  std::size_t evaluations = 0;

 private:
  std::size_t n_;
  RhsEvaluator eval_;
};

double error_norm(std::span<const double> err, std::span<const double> y0,
                  std::span<const double> y1, double atol, double rtol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

double initial_step(System& sys, std::span<const double> y, std::span<const double> f0,
                    double atol, double rtol, double t_span) {
  // Hairer's starting-step heuristic, order 5.
  const std::size_t d = y.size();
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double sc = atol + rtol * std::abs(y[i]);
    d0 = std::max(d0, std::abs(y[i]) / sc);
    d1 = std::max(d1, std::abs(f0[i]) / sc);
  }
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, t_span);
  std::vector<double> y1(d), f1(d);
  for (std::size_t i = 0; i < d; ++i) y1[i] = y[i] + h0 * f0[i];
  sys(y1, f1);
  double d2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double sc = atol + rtol * std::abs(y[i]);
    d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc);
  }
  d2 /= h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, t_span});
}

// Largest diagonal decay rate of the Jacobian: size N loses clusters at
// (N-1)/2 by fragmentation and N m1 by coagulation.
double decay_rate_bound(std::span<const double> y, std::size_t n) {
  double m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) m1 += static_cast<double>(i + 1) * std::max(y[i], 0.0);
  return 0.5 * static_cast<double>(n - 1) + static_cast<double>(n) * m1 + 1e-300;
}

SizeDistribution make_snapshot(std::span<const double> y, std::size_t n) {
  std::vector<double> rho(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
  // Projection already removed negatives; guard against -0.0 only.
  for (double& v : rho) v = std::max(v, 0.0);
  return SizeDistribution(std::move(rho), std::max(0.0, y[n]));
}

}  // namespace

double Trajectory::initial_mass() const noexcept {
  if (empty()) return 0.0;
  return moments.front().m1 + snapshots.front().gel_mass();
}

Trajectory integrate(const SizeDistribution& rho0, const SimulationConfig& cfg) {
  cfg.validate();
  if (rho0.truncation() != cfg.truncation_n) {
    throw ValidationError("integrate: initial distribution truncation differs from config");
  }
  const std::size_t n = cfg.truncation_n;
  const double atol = cfg.abs_tol;
  const double rtol = cfg.rel_tol;
  const double t_end = cfg.t_end;

  System sys(n, cfg.convolution_mode, cfg.threads);
  const std::size_t dim = sys.dim();

  std::vector<double> y(dim), y_new(dim), y_stage(dim), err(dim);
  std::array<std::vector<double>, 7> k;
  for (auto& v : k) v.assign(dim, 0.0);

  std::copy(rho0.densities().begin(), rho0.densities().end(), y.begin());
  y[n] = rho0.gel_mass();

  Trajectory traj;
  double flux = sys(y, k[0]);
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.snapshots.push_back(make_snapshot(y, n));
    traj.moments.push_back(moments(traj.snapshots.back()));
    traj.gel_flux_series.push_back(flux);
  };
  record(0.0);

  double t = 0.0;
  double h = initial_step(sys, y, k[0], atol, rtol, t_end);
  double err_old = 1e-4;
  std::size_t since_output = 0;
  bool rejected_last = false;

  auto stage = [&](std::initializer_list<std::pair<double, int>> terms, double hh) {
    for (std::size_t i = 0; i < dim; ++i) {
      double acc = 0.0;
      for (const auto& [coef, idx] : terms) acc += coef * k[static_cast<std::size_t>(idx)][i];
      y_stage[i] = y[i] + hh * acc;
    }
  };

  while (t < t_end) {
    bool last = false;
    h = std::min(h, kStabilityCap / decay_rate_bound(y, n));
    if (t + 1.0000001 * h >= t_end) {
      h = t_end - t;
      last = true;
    }
    if (h < 1e-14 * t_end) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "integrate: step size " << h << " underflowed at t = " << t;
      throw StepSizeUnderflow(msg.str());
    }

    stage({{a21, 0}}, h);
    sys(y_stage, k[1]);
    stage({{a31, 0}, {a32, 1}}, h);
    sys(y_stage, k[2]);
    stage({{a41, 0}, {a42, 1}, {a43, 2}}, h);
    sys(y_stage, k[3]);
    stage({{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}}, h);
    sys(y_stage, k[4]);
    stage({{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}}, h);
    sys(y_stage, k[5]);
    for (std::size_t i = 0; i < dim; ++i) {
      y_new[i] = y[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] +
                             a76 * k[5][i]);
    }
    const double flux_new = sys(y_new, k[6]);
    for (std::size_t i = 0; i < dim; ++i) {
      err[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                    e7 * k[6][i]);
    }
    const double err_norm = error_norm(err, y, y_new, atol, rtol);
    if (!std::isfinite(err_norm)) {
      h *= kMinShrink;
      ++traj.rejected_steps;
      rejected_last = true;
      continue;
    }

    const double fac11 = std::pow(std::max(err_norm, 1e-300), kExpo);
    if (err_norm <= 1.0) {
      // Accept.
      double fac = fac11 / std::pow(err_old, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kMaxGrow, 1.0 / kMinShrink);
      double h_next = h / fac;
      if (rejected_last) h_next = std::min(h_next, h);
      err_old = std::max(err_norm, 1e-4);

      t = last ? t_end : t + h;
      const double gel_before = y[n];
      y.swap(y_new);
      flux = flux_new;
      std::swap(k[0], k[6]);

      // Positivity projection on the finite-size densities.
      bool projected = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] >= 0.0) continue;
        if (y[i] < -10.0 * atol) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "integrate: density of size " << i + 1 << " is " << y[i] << " at t = " << t
              << " (below -10 abs_tol)";
          throw NegativityFailure(msg.str());
        }
        traj.projected_mass += static_cast<double>(i + 1) * (-y[i]);
        y[i] = 0.0;
        projected = true;
      }
      // Stage weights of both signs can shave the gel total by rounding.
      if (y[n] < gel_before) y[n] = gel_before;
      if (projected) flux = sys(y, k[0]);

      ++traj.accepted_steps;
      ++since_output;
      if (t >= t_end) {
        record(t_end);
        break;
      }
      if (since_output >= cfg.output_stride) {
        record(t);
        since_output = 0;
      }
      h = h_next;
      rejected_last = false;
    } else {
      h /= std::min(1.0 / kMinShrink, fac11 / kSafety);
      ++traj.rejected_steps;
      rejected_last = true;
    }
  }
  traj.rhs_evaluations = sys.evaluations;
  return traj;
}

std::optional<double> detect_gelation(const Trajectory& traj, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError("detect_gelation: threshold must lie in (0,1)");
  }
  if (traj.empty()) return std::nullopt;
  const double mass = traj.initial_mass();
  if (mass <= 0.0) return std::nullopt;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.snapshots[i].gel_mass() / mass >= threshold) return traj.times[i];
  }
  return std::nullopt;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t k) {
  out << "t,m0,m1,m2,gel_mass";
  for (std::size_t j = 1; j <= k; ++j) out << ",rho_" << j;
  out << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& mv = traj.moments[i];
    const auto& snap = traj.snapshots[i];
    out << format_double(traj.times[i]) << ',' << format_double(mv.m0) << ','
        << format_double(mv.m1) << ',' << format_double(mv.m2) << ','
        << format_double(snap.gel_mass());
    for (std::size_t j = 1; j <= k; ++j) {
      out << ',' << format_double(j <= snap.truncation() ? snap.at(j) : 0.0);
    }
    out << '\n';
  }
}

void write_moments_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,m0,m1,m2,gel_mass,gel_flux\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& mv = traj.moments[i];
    out << format_double(traj.times[i]) << ',' << format_double(mv.m0) << ','
        << format_double(mv.m1) << ',' << format_double(mv.m2) << ','
        << format_double(traj.snapshots[i].gel_mass()) << ','
        << format_double(traj.gel_flux_series[i]) << '\n';
  }
}

}  // namespace critcf
