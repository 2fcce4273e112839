#include "critcf/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "critcf/analysis.hpp"
#include "critcf/bernstein.hpp"
#include "critcf/equilibrium.hpp"
#include "critcf/error.hpp"
#include "critcf/hj.hpp"
#include "critcf/integrator.hpp"

namespace critcf::verify {

namespace {

using Clock = std::chrono::steady_clock;
using boost::multiprecision::cpp_rational;

std::string num(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

class Recorder {
 public:
  Recorder(std::string id, std::string title) {
    result_.id = std::move(id);
    result_.title = std::move(title);
    result_.passed = true;
  }
  void expect(bool ok, const std::string& line) {
    result_.details.push_back((ok ? "ok    " : "FAIL  ") + line);
    if (!ok) result_.passed = false;
  }
  CheckResult take() { return std::move(result_); }

 private:
  CheckResult result_;
};

SizeDistribution monodisperse(double m, std::size_t n) {
  return build_initial(InitialDataSpec::monodisperse(1, m), n);
}

Trajectory run_ode(double m, std::size_t n, double t_end, std::size_t stride) {
  SimulationConfig cfg;
  cfg.truncation_n = n;
  cfg.t_end = t_end;
  cfg.output_stride = stride;
  return integrate(monodisperse(m, n), cfg);
}

std::vector<double> random_sparse(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n, 0.0);
  for (auto& x : v) {
    if (u(gen) < 0.6) x = u(gen) / static_cast<double>(n);
  }
  return v;
}

// Exact recursion for rational m.
std::vector<cpp_rational> rational_recursion(const cpp_rational& m, std::size_t length) {
  std::vector<cpp_rational> rho(length);
  cpp_rational prefix = 0;
  for (std::size_t l = 1; l <= length; ++l) {
    cpp_rational conv = 0;
    for (std::size_t i = 1; i < l; ++i) {
      conv += cpp_rational(i) * rho[i - 1] * cpp_rational(l - i) * rho[l - i - 1];
    }
    rho[l - 1] = (2 * m * (1 - m) + conv - 2 * prefix) / ((2 * m + 1) * cpp_rational(l) + 1);
    prefix += rho[l - 1];
  }
  return rho;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// ---------------------------------------------------------------------------

CheckResult equilibrium_identities() {
  Recorder rec("criterion-1", "equilibrium recursion identities");
  for (double m : {0.1, 0.3, 0.5}) {
    const auto table = recursion(m, 2048);
    const auto doubled = recursion(m, 4096);
    const auto v = validate(table);
    const auto w = validate(doubled);
    const std::string tag = "m=" + num(m) + ": ";
    rec.expect(v.all_nonnegative, tag + "all rho~(l) >= 0 for l <= 2048");
    rec.expect(v.rhs_residual <= 1e-8,
               tag + "residual over j <= " + std::to_string(v.residual_window) + " = " + num(v.rhs_residual));
    rec.expect(w.m0_gap < v.m0_gap,
               tag + "m0 gap " + num(v.m0_gap) + " -> " + num(w.m0_gap) + " when L doubles");
    rec.expect(w.m1_gap < v.m1_gap,
               tag + "m1 gap " + num(v.m1_gap) + " -> " + num(w.m1_gap) + " when L doubles");
  }
  return rec.take();
}

CheckResult nonexistence_witnesses() {
  Recorder rec("criterion-2", "nonexistence witnesses");
  const auto exact2 = rational_recursion(cpp_rational(2), 1);
  rec.expect(exact2[0] == cpp_rational(-2, 3), "m=2: exact rho~(1) = -2/3");
  const auto verdict = existence_verdict(2.0, 100);
  const double err = std::abs(verdict.table.values[0] - exact2[0].convert_to<double>());
  rec.expect(err <= 1e-15, "m=2: |rho~(1) + 2/3| = " + num(err));
  rec.expect(verdict.kind == Existence::nonexistent && verdict.witness_index == 1,
             "m=2: verdict nonexistent with witness at l = " + std::to_string(verdict.witness_index));

  const auto exact1 = rational_recursion(cpp_rational(1), 100);
  rec.expect(std::all_of(exact1.begin(), exact1.end(), [](const cpp_rational& x) { return x == 0; }),
             "m=1: exact rho~(l) = 0 for l <= 100");
  const auto table1 = recursion(1.0, 100);
  double worst = 0.0;
  for (double x : table1.values) worst = std::max(worst, std::abs(x));
  rec.expect(worst <= 1e-15, "m=1: max_{l<=100} |rho~(l)| = " + num(worst));
  return rec.take();
}

CheckResult m0_law() {
  Recorder rec("criterion-3", "closed-form m0 law");
  const double m = 0.3;
  const auto traj = run_ode(m, 512, 20.0, 1);
  const double m0_initial = traj.moments.front().m0;
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.gel_flux_series[i] >= 1e-12) {
      ++skipped;
      continue;
    }
    ++checked;
    worst = std::max(worst, std::abs(traj.moments[i].m0 - m0_closed_form(m, m0_initial, traj.times[i])));
  }
  rec.expect(checked > 0 && worst <= 1e-6,
             "max |m0 - closed form| = " + num(worst) + " over " + std::to_string(checked) +
                 " output times (" + std::to_string(skipped) + " with gel flux >= 1e-12)");
  return rec.take();
}

CheckResult gelation_dichotomy() {
  Recorder rec("criterion-4", "mass conservation and gelation");
  {
    const double m = 0.3;
    const auto traj = run_ode(m, 512, 20.0, 1);
    SimulationConfig cfg;
    double worst_ratio = 0.0, max_gel = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double drift = std::abs(traj.moments[i].m1 + traj.snapshots[i].gel_mass() - m);
      const double bound = (cfg.abs_tol + cfg.rel_tol * m) * traj.times[i] * 10.0;
      worst_ratio = std::max(worst_ratio, bound > 0.0 ? drift / bound : (drift > 0.0 ? 2.0 : 0.0));
      max_gel = std::max(max_gel, traj.snapshots[i].gel_mass());
    }
    rec.expect(worst_ratio <= 1.0, "m=0.3: worst drift of m1 + gel / allowed drift = " + num(worst_ratio));
    rec.expect(max_gel < 1e-10, "m=0.3: max gel mass up to t=20 = " + num(max_gel));
  }
  std::optional<double> onset[2];
  const std::size_t sizes[2] = {4096, 8192};
  for (int k = 0; k < 2; ++k) {
    const auto traj = run_ode(2.0, sizes[k], 3.0, 25);
    onset[k] = detect_gelation(traj, 0.01);
    rec.expect(onset[k].has_value() && *onset[k] <= 3.0,
               "m=2, N=" + std::to_string(sizes[k]) + ": 1% gel onset at t = " +
                   (onset[k] ? num(*onset[k]) : std::string("none")));
  }
  if (onset[0] && onset[1]) {
    const double change = std::abs(*onset[1] - *onset[0]) / *onset[0];
    rec.expect(change < 0.1, "m=2: relative onset change when N doubles = " + num(change));
  }
  return rec.take();
}

CheckResult long_time_convergence() {
  Recorder rec("criterion-5", "long-time convergence");
  const double m = 0.3;
  const auto table = recursion(m, 2048);
  double err[2] = {0.0, 0.0};
  const double ends[2] = {50.0, 100.0};
  for (int k = 0; k < 2; ++k) {
    const auto traj = run_ode(m, 512, ends[k], 1000);
    err[k] = convergence_report(traj, table, 20).sup_errors.back();
  }
  rec.expect(err[1] <= 1e-4, "sup_{l<=20} |rho(l,100) - rho~(l)| = " + num(err[1]));
  rec.expect(err[1] < err[0], "error at t=50 " + num(err[0]) + " > error at t=100 " + num(err[1]));
  return rec.take();
}

CheckResult transform_consistency() {
  Recorder rec("criterion-6", "transform consistency");
  std::mt19937_64 gen(6);
  {
    // Densities bounded away from zero keep the leading O(h) term, which is
    // proportional to rho(l+1), from vanishing.
    std::uniform_real_distribution<double> u(0.03, 0.1);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> v(12);
      for (auto& x : v) x = u(gen);
      const SizeDistribution rho(v);
      const std::function<double(double)> g = [&rho](double z) { return transform_G_at(rho.densities(), z); };
      for (int l = 1; l <= 5; ++l) {
        const double h = default_extraction_step(l);
        const double exact = rho.at(static_cast<std::size_t>(l));
        const double e1 = std::abs(extract_density(g, l, h) - exact);
        const double e2 = std::abs(extract_density(g, l, h / 2) - exact);
        lo = std::min(lo, e1 / e2);
        hi = std::max(hi, e1 / e2);
      }
    }
    rec.expect(lo >= 1.6 && hi <= 2.4,
               "extraction error ratio under halving h, l <= 5, 20 distributions: [" + num(lo) + ", " + num(hi) + "]");
  }
  {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    int tested = 0;
    while (tested < 100) {
      std::vector<double> v(60);
      double total = 0.0;
      for (auto& x : v) total += (x = u(gen) < 0.3 ? u(gen) : 0.0);
      if (total == 0.0) continue;
      const double scale = u(gen) / total;  // m0 <= 1
      for (auto& x : v) x *= scale;
      ++tested;
      for (int k = 1; k <= 20; ++k) {
        for (int iz = 1; iz <= 18; ++iz) {
          const double z = 0.05 * iz;
          double series = transform_G_at(v, 0.0);
          double power = 1.0;
          for (int l = 1; l <= k; ++l) {
            power *= z;
            series -= v[static_cast<std::size_t>(l - 1)] * power;
          }
          const double err = std::abs(transform_G_at(v, z) - series);
          // The bound drops below rounding for small z and large k.
          const double bound = (k + 1) * std::pow(z, k + 1) / ((1 - z) * (1 - z)) + 1e-15;
          worst = std::max(worst, err - bound);
        }
      }
    }
    rec.expect(worst <= 0.0, "Taylor remainder minus (bound + 1e-15), worst over 100 distributions = " + num(worst));
  }
  return rec.take();
}

CheckResult hj_validation() {
  Recorder rec("criterion-7", "Hamilton-Jacobi solver validation");
  const double dz = 1e-3;
  const auto nodes = z_grid_nodes(dz);
  {
    const double m = 0.3;
    const auto g = transform_G(SizeDistribution(recursion(m, 2048).values), nodes);
    const double r = stationary_residual_G(g, m);
    rec.expect(r <= 1e-4, "m=0.3 equilibrium transform, stationary residual = " + num(r));
  }
  {
    auto s = evolve_G(make_state(transform_G(monodisperse(1.0, 4), nodes), 1.0), 30.0);
    double sup = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      if (s.grid.nodes[i] <= 0.9) sup = std::max(sup, std::abs(s.grid.values[i]));
    }
    rec.expect(sup <= 1e-3, "m=1: sup_{z<=0.9} |G(z,30)| = " + num(sup));
  }
  const double m = 0.3;
  const auto rho0 = monodisperse(m, 512);
  {
    const double spacings[] = {4e-3, 2e-3, 1e-3};
    const auto rep = refine_and_estimate_order(g_evolution_problem(rho0, 1.0), spacings);
    rec.expect(!rep.degenerate && rep.observed_order >= 0.7 && rep.observed_order <= 1.3,
               "observed order (dz = 4e-3, 2e-3, 1e-3) = " + num(rep.observed_order));
  }
  {
    const auto hj = g_evolution_problem(rho0, 1.0)(dz);
    SimulationConfig cfg;
    cfg.truncation_n = 512;
    cfg.t_end = 1.0;
    cfg.output_stride = 1000000;
    const auto traj = integrate(rho0, cfg);
    const auto ode = transform_G(traj.snapshots.back(), hj.nodes);
    const double err = sup_diff(hj.values, ode.values);
    rec.expect(err <= 5 * dz * m, "sup |G_hj - G_ode| at t=1 = " + num(err) + " (limit " + num(5 * dz * m) + ")");
  }
  return rec.take();
}

CheckResult transform_shapes() {
  Recorder rec("criterion-8", "shape of the transforms");
  const double m = 0.3;
  const double tol = 1e-6;
  const auto traj = run_ode(m, 512, 20.0, 1);
  const auto xs = x_grid_nodes(1e-2, kDefaultXMax);
  const auto zs = z_grid_nodes(1e-3);
  const double h = 0.05;
  double min_slope = std::numeric_limits<double>::infinity(), max_slope = -min_slope;
  double max_curv = -std::numeric_limits<double>::infinity();
  std::vector<double> worst_ratio(4, -std::numeric_limits<double>::infinity());
  bool monotone = true;
  for (int k = 0; k < 10; ++k) {
    const std::size_t i = static_cast<std::size_t>(k) * (traj.size() - 1) / 9;
    const auto f = slope_diagnostics(transform_F(traj.snapshots[i], xs));
    min_slope = std::min(min_slope, f.min_slope);
    max_slope = std::max(max_slope, f.max_slope);
    max_curv = std::max(max_curv, f.max_second_difference);
    const auto rep = check_complete_monotonicity(transform_G(traj.snapshots[i], zs), 4, h);
    monotone = monotone && rep.passed;
    for (std::size_t o = 0; o < 4; ++o) worst_ratio[o] = std::max(worst_ratio[o], rep.worst[o] / rep.tolerance[o]);
  }
  rec.expect(min_slope >= -tol && max_slope <= m + tol,
             "ODE run, 10 times: F_x in [" + num(min_slope) + ", " + num(max_slope) + "]");
  rec.expect(max_curv <= tol, "ODE run, 10 times: max F_xx = " + num(max_curv));
  std::string ratios;
  for (double r : worst_ratio) ratios += " " + num(r);
  rec.expect(monotone, "ODE run, 10 times: max Delta_h^k G / tolerance for k=1..4:" + ratios);

  // The x-form solver from the envelope, sampled at t = 0.5, 1, ..., 5.
  const auto nodes = x_grid_nodes(0.05, kDefaultXMax);
  TransformGrid env{GridVariable::x, nodes, {}, m};
  for (double x : nodes) env.values.push_back(-m * std::expm1(-x));
  double hj_min = std::numeric_limits<double>::infinity(), hj_max = -hj_min, hj_curv = -hj_min;
  double next = 0.5;
  int samples = 0;
  evolve_F(make_state(env, m), 5.0, [&](const HJState& s) {
    if (s.time + 1e-12 < next) return;
    next += 0.5;
    ++samples;
    const auto d = slope_diagnostics(s.grid);
    hj_min = std::min(hj_min, d.min_slope);
    hj_max = std::max(hj_max, d.max_slope);
    hj_curv = std::max(hj_curv, d.max_second_difference);
  });
  rec.expect(samples == 10 && hj_min >= -tol && hj_max <= m + tol && hj_curv <= tol,
             "x-form solver, " + std::to_string(samples) + " times: F_x in [" + num(hj_min) + ", " +
                 num(hj_max) + "], max F_xx = " + num(hj_curv));
  return rec.take();
}

CheckResult hpm_bounds() {
  Recorder rec("criterion-9", "h- and h+ bounds");
  std::vector<double> deltas, rs;
  for (int i = 0; i <= 500; ++i) deltas.push_back(i * 1e-3);
  for (int i = 0; i <= 1000; ++i) rs.push_back(i * 1e-3);
  const auto rep = verify_hpm(deltas, rs);
  rec.expect(rep.h_minus_passed, "max h- = " + num(rep.max_h_minus) + " at (delta, r) = (" +
                                     num(rep.max_h_minus_delta) + ", " + num(rep.max_h_minus_r) +
                                     "), gap = " + num(rep.gap));
  rec.expect(rep.h_plus_passed, "min h+ = " + num(rep.min_h_plus) + " at (delta, r) = (" +
                                    num(rep.min_h_plus_delta) + ", " + num(rep.min_h_plus_r) + ")");
  return rec.take();
}

CheckResult oracle_equivalence() {
  Recorder rec("criterion-10", "direct and fft agreement");
  std::mt19937_64 gen(10);
  std::uniform_int_distribution<std::size_t> pick(2, 64);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const SizeDistribution rho(random_sparse(gen, pick(gen)));
    worst = std::max(worst, normwise_rhs_error(rho, rhs(rho, ConvolutionMode::direct),
                                               rhs(rho, ConvolutionMode::fft)));
  }
  rec.expect(worst <= 1e-12, "200 instances with N <= 64, max normwise error = " + num(worst));

  BenchOptions opt;
  opt.sizes = {256, 512, 1024, 2048, 4096, 8192};
  opt.repetitions = 5;
  const auto bench = run_bench(opt);
  std::string table;
  for (const auto& row : bench.rows) {
    table += " " + std::to_string(row.size) + ":" + std::string(to_string(row.mode)) + "=" + num(row.median_seconds);
  }
  rec.expect(bench.crossover != 0 && bench.crossover <= 8192,
             "fft crossover at N = " + std::to_string(bench.crossover) + ";" + table);
  return rec.take();
}

// ---------------------------------------------------------------------------

CheckResult rhs_mass_closure() {
  Recorder rec("invariant-rhs-mass", "rhs conserves mass including gel flux");
  std::mt19937_64 gen(1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) * 10;
    const SizeDistribution rho(random_sparse(gen, n));
    for (auto mode : {ConvolutionMode::direct, ConvolutionMode::fft}) {
      const auto d = rhs(rho, mode);
      double total = d.d_gel_mass;
      for (std::size_t j = 0; j < n; ++j) total += static_cast<double>(j + 1) * d.d_densities[j];
      const double m1 = moment(rho, 1);
      const double scale = m1 * m1 * static_cast<double>(n) + moment(rho, 2) + 1e-300;
      worst = std::max(worst, std::abs(total) / scale);
    }
  }
  rec.expect(worst <= 1e-10, "max |sum j d rho + d gel| / scale = " + num(worst));
  return rec.take();
}

CheckResult recursion_paths_agree() {
  Recorder rec("invariant-recursion-paths", "direct and blocked fft recursion agree");
  for (double m : {0.1, 0.5}) {
    const auto a = recursion(m, 12000, RecursionMethod::direct);
    const auto b = recursion(m, 12000, RecursionMethod::fft);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.length; ++i) {
      worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / std::max(a.values[0], 1e-300));
    }
    rec.expect(worst <= 1e-12, "m=" + num(m) + ", L=12000: max difference / rho~(1) = " + num(worst));
  }
  return rec.take();
}

CheckResult closed_forms() {
  Recorder rec("invariant-closed-forms", "m0 law and gelation time");
  double worst = 0.0;
  const double step = 1e-5;
  for (double m : {0.2, 1.0, 2.0}) {
    for (double t : {0.1, 1.0, 5.0}) {
      const double d = (m0_closed_form(m, m, t + step) - m0_closed_form(m, m, t - step)) / (2 * step);
      worst = std::max(worst, std::abs(d - (0.5 * (m - m * m) - 0.5 * m0_closed_form(m, m, t))));
    }
  }
  rec.expect(worst <= 1e-9, "m0 law solves its ODE, max defect = " + num(worst));
  double root = 0.0;
  for (double m : {1.5, 2.0, 4.0}) root = std::max(root, std::abs(m0_closed_form(m, m, *gelation_time_bound(m, m))));
  rec.expect(root <= 1e-12, "m0 vanishes at the gelation bound, max |m0| = " + num(root));
  return rec.take();
}

CheckResult weak_form_counts() {
  Recorder rec("invariant-weak-form", "weak form with g = 1");
  SimulationConfig cfg;
  cfg.truncation_n = 256;
  cfg.t_end = 5.0;
  const auto traj = integrate(monodisperse(0.3, 256), cfg);
  const auto series = weak_form_residual(traj, [](std::size_t) { return 1.0; });
  double worst = 0.0;
  for (double r : series.residuals) worst = std::max(worst, std::abs(r));
  rec.expect(!series.residuals.empty() && worst <= 1e-5, "m=0.3: max |residual| = " + num(worst));
  return rec.take();
}

CheckResult hj_band() {
  Recorder rec("invariant-hj-band", "z-form solver stays in the band");
  for (double m : {0.3, 0.5}) {
    auto s = evolve_G(make_state(transform_G(monodisperse(m, 4), z_grid_nodes(2e-3)), m), 5.0);
    const auto b = check_band(s.grid);
    rec.expect(!s.band_flagged && b.max_below_zero <= kBandTolerance && b.max_above_envelope <= kBandTolerance,
               "m=" + num(m) + ": band excess = " + num(s.band_excess));
  }
  return rec.take();
}

}  // namespace

double normwise_rhs_error(const SizeDistribution& rho, const RhsOutput& a, const RhsOutput& b) {
  const auto dens = rho.densities();
  const std::size_t n = dens.size();
  std::vector<double> weighted(n), gain(n);
  for (std::size_t j = 0; j < n; ++j) weighted[j] = static_cast<double>(j + 1) * dens[j];
  self_convolve(weighted, gain, ConvolutionMode::direct);
  const double m1 = moment(rho, 1);
  double norm = 0.0, suffix = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    norm = std::max(norm, 0.5 * gain[j] + weighted[j] * m1 + 0.5 * static_cast<double>(j) * dens[j] + suffix);
    suffix += dens[j];
  }
  if (norm == 0.0) norm = 1.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(a.d_densities[j] - b.d_densities[j]) / norm);
  const double gel_scale = std::max(m1 * m1 * static_cast<double>(n), 1e-300);
  return std::max(worst, std::abs(a.d_gel_mass - b.d_gel_mass) / gel_scale);
}

BenchReport run_bench(const BenchOptions& options) {
  if (options.sizes.empty()) throw ValidationError("bench: sizes must not be empty");
  if (options.repetitions < 5) throw ValidationError("bench: repetitions must be >= 5");
  if (options.modes.empty()) throw ValidationError("bench: modes must not be empty");
  for (auto mode : options.modes) {
    if (mode == ConvolutionMode::automatic) throw ValidationError("bench: modes are direct and fft");
  }

  std::mt19937_64 gen(2024);
  std::vector<SizeDistribution> inputs;
  BenchReport report;
  for (std::size_t n : options.sizes) {
    if (n < 2) throw ValidationError("bench: sizes must be >= 2");
    inputs.emplace_back(random_sparse(gen, n));
    const auto& rho = inputs.back();
    const auto direct = rhs(rho, ConvolutionMode::direct);
    const auto fast = options.fft_override ? options.fft_override(rho) : rhs(rho, ConvolutionMode::fft);
    const double err = normwise_rhs_error(rho, direct, fast);
    report.cross_check_error = std::max(report.cross_check_error, err);
    if (!(err <= 1e-12)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "bench: fft and direct disagree at N = " << n << " (normwise error " << err
          << "); timings withheld";
      throw NumericalError(msg.str());
    }
  }

  for (std::size_t s = 0; s < options.sizes.size(); ++s) {
    const auto& rho = inputs[s];
    const std::size_t n = rho.truncation();
    for (auto mode : options.modes) {
      RhsEvaluator eval(n, mode, options.threads);
      std::vector<double> d(n);
      std::function<void()> once = [&] { eval.evaluate(rho.densities(), d); };
      if (mode == ConvolutionMode::fft && options.fft_override) {
        once = [&] { options.fft_override(rho); };
      }
      once();
      auto t0 = Clock::now();
      once();
      const double single = std::chrono::duration<double>(Clock::now() - t0).count();
      const std::size_t batch = std::max<std::size_t>(1, static_cast<std::size_t>(2e-3 / std::max(single, 1e-9)));
      std::vector<double> times;
      for (std::size_t r = 0; r < options.repetitions; ++r) {
        t0 = Clock::now();
        for (std::size_t b = 0; b < batch; ++b) once();
        times.push_back(std::chrono::duration<double>(Clock::now() - t0).count() / static_cast<double>(batch));
      }
      std::sort(times.begin(), times.end());
      const std::size_t k = times.size();
      const double median = k % 2 ? times[k / 2] : 0.5 * (times[k / 2 - 1] + times[k / 2]);
      report.rows.push_back({n, mode, median, times.front(), times.back()});
    }
  }

  // Smallest size from which fft stays faster at every larger measured size.
  auto median_of = [&](std::size_t n, ConvolutionMode mode) -> std::optional<double> {
    for (const auto& row : report.rows) {
      if (row.size == n && row.mode == mode) return row.median_seconds;
    }
    return std::nullopt;
  };
  auto sorted = options.sizes;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = sorted.size(); i-- > 0;) {
    const auto d = median_of(sorted[i], ConvolutionMode::direct);
    const auto f = median_of(sorted[i], ConvolutionMode::fft);
    if (!d || !f || *f >= *d) break;
    report.crossover = sorted[i];
  }
  return report;
}

std::vector<Check> acceptance_checks() {
  return {
      {"criterion-1", "equilibrium recursion identities", 10.0, equilibrium_identities},
      {"criterion-2", "nonexistence witnesses", 1.0, nonexistence_witnesses},
      {"criterion-3", "closed-form m0 law", 30.0, m0_law},
      {"criterion-4", "mass conservation and gelation", 120.0, gelation_dichotomy},
      {"criterion-5", "long-time convergence", 120.0, long_time_convergence},
      {"criterion-6", "transform consistency", 10.0, transform_consistency},
      {"criterion-7", "Hamilton-Jacobi solver validation", 120.0, hj_validation},
      {"criterion-8", "shape of the transforms", 30.0, transform_shapes},
      {"criterion-9", "h- and h+ bounds", 1.0, hpm_bounds},
      {"criterion-10", "direct and fft agreement", 60.0, oracle_equivalence},
  };
}

std::vector<Check> invariant_checks() {
  return {
      {"invariant-rhs-mass", "rhs conserves mass including gel flux", 0.0, rhs_mass_closure},
      {"invariant-recursion-paths", "direct and blocked fft recursion agree", 0.0, recursion_paths_agree},
      {"invariant-closed-forms", "m0 law and gelation time", 0.0, closed_forms},
      {"invariant-weak-form", "weak form with g = 1", 0.0, weak_form_counts},
      {"invariant-hj-band", "z-form solver stays in the band", 0.0, hj_band},
  };
}

std::vector<Check> select_suite(std::string_view suite) {
  auto acceptance = acceptance_checks();
  auto invariants = invariant_checks();
  if (suite == "acceptance") return acceptance;
  if (suite == "invariants") return invariants;
  if (suite == "all") {
    invariants.insert(invariants.end(), acceptance.begin(), acceptance.end());
    return invariants;
  }
  for (auto* list : {&acceptance, &invariants}) {
    for (auto& c : *list) {
      if (c.id == suite) return {c};
    }
  }
  throw ValidationError("verify: unknown suite '" + std::string(suite) +
                        "' (all, acceptance, invariants, or a check id such as criterion-3)");
}

CheckResult run_check(const Check& check) {
  const auto t0 = Clock::now();
  CheckResult r = check.run();
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (check.budget_seconds > 0.0) {
    const bool ok = r.seconds <= check.budget_seconds;
    r.details.push_back(std::string(ok ? "ok    " : "FAIL  ") + "runtime " + num(r.seconds) + " s (limit " +
                        num(check.budget_seconds) + " s)");
    if (!ok) r.passed = false;
  }
  return r;
}

}  // namespace critcf::verify
