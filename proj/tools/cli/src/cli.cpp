#include "critcf/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "critcf/analysis.hpp"
#include "critcf/bernstein.hpp"
#include "critcf/csv.hpp"
#include "critcf/equilibrium.hpp"
#include "critcf/error.hpp"
#include "critcf/hj.hpp"
#include "critcf/integrator.hpp"
#include "critcf/version.hpp"

namespace critcf::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum class Kind { real, count, text, count_list, text_list };

struct Field {
  const char* name;  // JSON key; the flag is --name with '_' as '-'
  Kind kind;
  std::vector<std::string> commands;
  json fallback;  // null: no default
  const char* help;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"out_dir", Kind::text, {"simulate", "equilibrium", "hj", "verify", "bench"}, ".", "output directory"},
      {"threads", Kind::count, {"simulate", "equilibrium", "hj", "verify", "bench"}, 1, "worker threads"},
      {"mass", Kind::real, {"simulate", "equilibrium", "hj"}, nullptr, "total mass m"},
      {"init", Kind::text, {"simulate", "hj"}, "monodisperse:1",
       "initial data: monodisperse:j0[:c], geometric:q or explicit:v1,v2,..."},
      {"n", Kind::count, {"simulate", "hj"}, 512, "truncation size N"},
      {"t_end", Kind::real, {"simulate"}, 20.0, "final time"},
      {"t_end", Kind::real, {"hj"}, 1.0, "final time"},
      {"rtol", Kind::real, {"simulate"}, 1e-10, "relative tolerance"},
      {"atol", Kind::real, {"simulate"}, 1e-13, "absolute tolerance"},
      {"mode", Kind::text, {"simulate"}, "auto", "convolution: direct, fft or auto"},
      {"stride", Kind::count, {"simulate"}, 1, "accepted steps between snapshots"},
      {"length", Kind::count, {"equilibrium"}, 2048, "recursion length L"},
      {"form", Kind::text, {"hj"}, "z", "z (generating function) or x (transform in x)"},
      {"grid_dz", Kind::real, {"hj"}, 1e-3, "grid spacing (in z, or in x for the x-form)"},
      {"x_max", Kind::real, {"hj"}, kDefaultXMax, "right end of the x-grid"},
      {"cutoff_n", Kind::count, {"hj"}, 10000, "theta_n cutoff index"},
      {"eps", Kind::real, {"hj"}, 0.0, "viscosity (x-form only)"},
      {"cfl", Kind::real, {"hj"}, 0.5, "CFL number in (0,1)"},
      {"snapshots", Kind::count, {"hj"}, 10, "snapshots written besides t = 0"},
      {"suite", Kind::text, {"verify"}, "all", "all, acceptance, invariants or a check id"},
      {"sizes", Kind::count_list, {"bench"}, json::array({1024, 4096, 16384}), "comma-separated sizes"},
      {"reps", Kind::count, {"bench"}, 7, "repetitions per timing (>= 5)"},
      {"modes", Kind::text_list, {"bench"}, json::array({"direct", "fft"}), "comma-separated modes"},
  };
  return table;
}

bool applies(const Field& f, const std::string& command) {
  return std::find(f.commands.begin(), f.commands.end(), command) != f.commands.end();
}

std::string flag_name(const Field& f) {
  std::string s = std::string("--") + f.name;
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) parts.push_back(item);
  return parts;
}

double to_real(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ValidationError(what + ": expected a number, got '" + text + "'");
  }
  return v;
}

unsigned long long to_count(const std::string& text, const std::string& what) {
  unsigned long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError(what + ": expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

json from_flag(const Field& f, const std::string& raw) {
  const std::string what = flag_name(f);
  switch (f.kind) {
    case Kind::real: return to_real(raw, what);
    case Kind::count: return to_count(raw, what);
    case Kind::text: return raw;
    case Kind::count_list: {
      json a = json::array();
      for (const auto& p : split(raw)) a.push_back(to_count(p, what));
      return a;
    }
    case Kind::text_list: {
      json a = json::array();
      for (const auto& p : split(raw)) a.push_back(p);
      return a;
    }
  }
  return nullptr;
}

bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

json from_config(const Field& f, const json& v) {
  const std::string what = std::string("config field '") + f.name + "'";
  switch (f.kind) {
    case Kind::real:
      if (!v.is_number()) throw ValidationError(what + " must be a number");
      return v.get<double>();
    case Kind::count:
      if (!is_count(v)) throw ValidationError(what + " must be a nonnegative integer");
      return v.get<unsigned long long>();
    case Kind::text:
      if (!v.is_string()) throw ValidationError(what + " must be a string");
      return v;
    case Kind::count_list:
      if (!v.is_array() || !std::all_of(v.begin(), v.end(), is_count)) {
        throw ValidationError(what + " must be an array of nonnegative integers");
      }
      return v;
    case Kind::text_list:
      if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_string(); })) {
        throw ValidationError(what + " must be an array of strings");
      }
      return v;
  }
  return nullptr;
}

json load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config: top level must be an object");
  json out = json::object();
  for (const auto& [key, value] : doc.items()) {
    if (key == "command") {
      if (value != command) throw ValidationError("config: command '" + value.dump() + "' does not match " + command);
      continue;
    }
    const auto it = std::find_if(fields().begin(), fields().end(),
                                 [&](const Field& f) { return key == f.name && applies(f, command); });
    if (it == fields().end()) {
      throw ValidationError("config: unknown field '" + key + "' for " + command);
    }
    out[key] = from_config(*it, value);
  }
  return out;
}

// Accessors on the resolved config.
double real(const json& cfg, const char* key) {
  if (cfg.at(key).is_null()) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    throw ValidationError("missing required " + flag);
  }
  return cfg.at(key).get<double>();
}
std::size_t count(const json& cfg, const char* key) { return cfg.at(key).get<std::size_t>(); }
std::string text(const json& cfg, const char* key) { return cfg.at(key).get<std::string>(); }
std::optional<double> maybe_real(const json& cfg, const char* key) {
  if (cfg.at(key).is_null()) return std::nullopt;
  return cfg.at(key).get<double>();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------

int run_simulate(const json& cfg, const fs::path& dir, json& summary) {
  const auto spec = parse_initial_data(text(cfg, "init"), maybe_real(cfg, "mass"));
  SimulationConfig sim;
  sim.truncation_n = count(cfg, "n");
  sim.t_end = real(cfg, "t_end");
  sim.rel_tol = real(cfg, "rtol");
  sim.abs_tol = real(cfg, "atol");
  sim.convolution_mode = parse_convolution_mode(text(cfg, "mode"));
  sim.output_stride = count(cfg, "stride");
  sim.threads = static_cast<unsigned>(count(cfg, "threads"));
  sim.validate();
  const auto rho0 = build_initial(spec, sim.truncation_n);
  const auto traj = integrate(rho0, sim);

  {
    auto out = open_output(dir / "trajectory.csv");
    write_trajectory_csv(out, traj, std::min<std::size_t>(32, sim.truncation_n));
  }
  {
    auto out = open_output(dir / "moments.csv");
    write_moments_csv(out, traj);
  }
  const double m = spec.declared_mass;
  const auto& last = traj.moments.back();
  summary = {
      {"mass", m},
      {"t_end", traj.times.back()},
      {"m0", last.m0},
      {"m1", last.m1},
      {"m2", last.m2},
      {"gel_mass", traj.snapshots.back().gel_mass()},
      {"m0_closed_form", m0_closed_form(m, traj.moments.front().m0, traj.times.back())},
      {"gelation_onset_1pct", nullable(detect_gelation(traj, 0.01))},
      {"gelation_time_bound", nullable(traj.moments.front().m0 > 0.0
                                           ? gelation_time_bound(m, traj.moments.front().m0)
                                           : std::nullopt)},
      {"projected_mass", traj.projected_mass},
      {"accepted_steps", traj.accepted_steps},
      {"rejected_steps", traj.rejected_steps},
      {"rhs_evaluations", traj.rhs_evaluations},
  };
  write_json(dir / "summary.json", summary);
  return kExitOk;
}

int run_equilibrium(const json& cfg, const fs::path& dir, json& summary) {
  const double m = real(cfg, "mass");
  const auto v = existence_verdict(m, count(cfg, "length"));
  {
    auto out = open_output(dir / "table.csv");
    write_table_csv(out, v.table);
  }
  summary = {
      {"mass", m},
      {"length", v.length},
      {"kind", std::string(to_string(v.kind))},
      {"witness", v.witness_index ? json{{"index", v.witness_index}, {"value", v.witness_value}} : json(nullptr)},
      {"all_nonnegative", v.all_nonnegative},
      {"min_index", v.min_index},
      {"min_value", v.min_value},
      {"partial_m0", v.table.partial_m0},
      {"partial_m1", v.table.partial_m1},
  };
  if (m <= 0.5 && v.all_nonnegative) {
    const auto r = validate(v.table);
    summary["validation"] = {
        {"m0_gap", r.m0_gap},
        {"m1_gap", r.m1_gap},
        {"tail_mass", r.tail_mass},
        {"resolved_length", r.resolved_length},
        {"tail_decay_rate", r.tail_decay_rate},
        {"residual_window", r.residual_window},
        {"rhs_residual", r.rhs_residual},
    };
  }
  write_json(dir / "verdict.json", summary);
  return kExitOk;
}

int run_hj(const json& cfg, const fs::path& dir, json& summary) {
  const auto spec = parse_initial_data(text(cfg, "init"), maybe_real(cfg, "mass"));
  const auto rho0 = build_initial(spec, count(cfg, "n"));
  const std::string form = text(cfg, "form");
  const double spacing = real(cfg, "grid_dz");
  if (!(spacing > 0.0)) throw ValidationError("hj: grid spacing must be > 0");
  const double t_end = real(cfg, "t_end");
  if (!(t_end > 0.0)) throw ValidationError("hj: t_end must be > 0");
  const std::size_t frames = count(cfg, "snapshots");
  if (frames == 0) throw ValidationError("hj: snapshots must be >= 1");

  TransformGrid grid;
  if (form == "z") {
    grid = transform_G(rho0, z_grid_nodes(spacing));
  } else if (form == "x") {
    grid = transform_F(rho0, x_grid_nodes(spacing, real(cfg, "x_max")));
  } else {
    throw ValidationError("hj: form must be z or x");
  }
  HJParams params;
  params.cutoff_n = count(cfg, "cutoff_n");
  params.viscosity_eps = real(cfg, "eps");
  params.cfl = real(cfg, "cfl");
  const double m = spec.declared_mass;
  auto state = make_state(std::move(grid), m, params);

  // Segment by segment so snapshots fall exactly on t_end k / frames.
  std::vector<HJState> kept{state};
  std::size_t steps = 0;
  const HJObserver observer = [&steps](const HJState&) { ++steps; };
  for (std::size_t k = 1; k <= frames; ++k) {
    const double target = k == frames ? t_end : t_end * static_cast<double>(k) / static_cast<double>(frames);
    state = form == "z" ? evolve_G(std::move(state), target, observer) : evolve_F(std::move(state), target, observer);
    kept.push_back(state);
  }

  {
    auto out = open_output(dir / "snapshots.csv");
    for (std::size_t i = 0; i < kept.size(); ++i) {
      std::ostringstream block;
      write_snapshot_csv(block, kept[i]);
      const std::string s = block.str();
      out << (i == 0 ? s : s.substr(s.find('\n') + 1));
    }
  }
  summary = {
      {"form", form},
      {"mass", m},
      {"time", state.time},
      {"steps", steps},
      {"band_excess", state.band_excess},
      {"band_flagged", state.band_flagged},
  };
  if (form == "z") {
    summary["stationary_residual"] = stationary_residual_G(state.grid, m);
  } else {
    const double sigma = default_blowup_sigma(m);
    json series = json::array();
    for (const auto& s : kept) series.push_back({{"time", s.time}, {"phi", blowup_functional(s.grid, sigma)}});
    summary["blowup_sigma"] = sigma;
    summary["blowup"] = series;
  }
  write_json(dir / "summary.json", summary);
  return kExitOk;
}

int run_verify(const json& cfg, const fs::path& dir, json& summary, std::ostream& out) {
  const auto checks = verify::select_suite(text(cfg, "suite"));
  json results = json::array();
  bool all = true;
  for (const auto& check : checks) {
    verify::CheckResult r;
    try {
      r = verify::run_check(check);
    } catch (const std::exception& e) {
      r.id = check.id;
      r.title = check.title;
      r.details.push_back(std::string("FAIL  exception: ") + e.what());
    }
    out << (r.passed ? "PASS " : "FAIL ") << r.id << ": " << r.title << '\n';
    for (const auto& line : r.details) out << "    " << line << '\n';
    out.flush();
    all = all && r.passed;
    results.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"seconds", r.seconds}, {"details", r.details}});
  }
  summary = {{"suite", text(cfg, "suite")}, {"passed", all}, {"checks", results}};
  write_json(dir / "verify.json", summary);
  return all ? kExitOk : kExitCheckFailed;
}

int run_bench(const json& cfg, const fs::path& dir, json& summary, const Hooks& hooks) {
  verify::BenchOptions opt;
  opt.sizes = cfg.at("sizes").get<std::vector<std::size_t>>();
  opt.repetitions = count(cfg, "reps");
  opt.threads = static_cast<unsigned>(count(cfg, "threads"));
  opt.modes.clear();
  for (const auto& name : cfg.at("modes").get<std::vector<std::string>>()) {
    opt.modes.push_back(parse_convolution_mode(name));
  }
  opt.fft_override = hooks.fft_override;
  const auto report = verify::run_bench(opt);

  auto out = open_output(dir / "bench.csv");
  out << "size,mode,median_seconds,min_seconds,max_seconds\n";
  json rows = json::array();
  for (const auto& r : report.rows) {
    out << r.size << ',' << to_string(r.mode) << ',' << format_double(r.median_seconds) << ','
        << format_double(r.min_seconds) << ',' << format_double(r.max_seconds) << '\n';
    rows.push_back({{"size", r.size},
                    {"mode", std::string(to_string(r.mode))},
                    {"median_seconds", r.median_seconds},
                    {"min_seconds", r.min_seconds},
                    {"max_seconds", r.max_seconds}});
  }
  summary = {{"cross_check_error", report.cross_check_error},
             {"crossover", report.crossover ? json(report.crossover) : json(nullptr)},
             {"rows", rows}};
  write_json(dir / "bench.json", summary);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, const Hooks& hooks, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical lab for critical coagulation-fragmentation with a(j,k) = jk and b = 1", "critcf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "integrate the truncated system in time"},
      {"equilibrium", "stationary recursion and existence verdict"},
      {"hj", "evolve a transform with the Hamilton-Jacobi solver"},
      {"verify", "run property checks"},
      {"bench", "time rhs evaluations, direct against fft"},
  };
  std::map<std::string, std::map<std::string, std::optional<std::string>>> raw;
  std::map<std::string, std::optional<std::string>> config_path;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path[name], "JSON file with the same fields as the flags");
    for (const auto& f : fields()) {
      if (applies(f, name)) sub->add_option(flag_name(f), raw[name][f.name], f.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  json cfg = json::object();
  fs::path dir;
  try {
    for (const auto& f : fields()) {
      if (applies(f, command)) cfg[f.name] = f.fallback;
    }
    if (config_path[command]) cfg.update(load_config(*config_path[command], command));
    for (const auto& f : fields()) {
      if (!applies(f, command)) continue;
      if (const auto& v = raw[command][f.name]) cfg[f.name] = from_flag(f, *v);
    }
    if (count(cfg, "threads") == 0) throw ValidationError("threads must be >= 1");
    dir = text(cfg, "out_dir");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory '" + dir.string() + "'");
  } catch (const ValidationError& e) {
    err << "critcf " << command << ": " << e.what() << '\n';
    return kExitValidation;
  }

  json meta = {{"artifact", "critcf"},
               {"version", kVersion},
               {"command", command},
               {"config", cfg},
               {"threads", count(cfg, "threads")},
               {"status", "running"}};
  int code = kExitOk;
  json summary;
  try {
    write_json(dir / "metadata.json", meta);
    if (command == "simulate") code = run_simulate(cfg, dir, summary);
    if (command == "equilibrium") code = run_equilibrium(cfg, dir, summary);
    if (command == "hj") code = run_hj(cfg, dir, summary);
    if (command == "verify") code = run_verify(cfg, dir, summary, out);
    if (command == "bench") code = run_bench(cfg, dir, summary, hooks);
    meta["status"] = code == kExitOk ? "ok" : "checks_failed";
  } catch (const ValidationError& e) {
    err << "critcf " << command << ": " << e.what() << '\n';
    meta["status"] = "validation_error";
    meta["error"] = e.what();
    code = kExitValidation;
  } catch (const NumericalError& e) {
    err << "critcf " << command << ": " << e.what() << '\n';
    meta["status"] = "numerical_error";
    meta["error"] = e.what();
    code = kExitNumerical;
  } catch (const std::exception& e) {
    err << "critcf " << command << ": " << e.what() << '\n';
    meta["status"] = "internal_error";
    meta["error"] = e.what();
    code = kExitInternal;
  }
  try {
    write_json(dir / "metadata.json", meta);
  } catch (const ValidationError& e) {
    err << "critcf " << command << ": " << e.what() << '\n';
    return kExitValidation;
  }
  if (code == kExitOk && command != "verify") out << summary.dump(2) << '\n';
  return code;
}

int run(int argc, const char* const* argv) { return run(argc, argv, {}, std::cout, std::cerr); }

}  // namespace critcf::cli
