#include "fplab/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fplab/scenario.hpp"
#include "fplab/verify.hpp"

namespace fplab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UnknownNameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ModelProblem model_from(const Scenario& s) {
  auto names = model_registry();
  if (std::find(names.begin(), names.end(), s.model) == names.end())
    throw UnknownNameError("unknown model '" + s.model + "'");
  return make_model(s.model, s.dimension);
}

DensityEstimator estimator_from(const Scenario& s) {
  DensityEstimator est;
  est.kind = s.estimator == "histogram" ? EstimatorKind::histogram
                                        : EstimatorKind::gaussian_kernel;
  est.bandwidth = s.bandwidth;
  return est;
}

// Nonnegative band-limited field: a seeded trig polynomial shifted so its
// minimum is zero.
ScalarField random_nonneg_field(const PeriodicGrid& g, std::uint64_t seed, int band,
                                double amplitude) {
  ScalarField f = synthesize_random_field(g, seed, band, amplitude);
  double lo = *std::min_element(f.values.begin(), f.values.end());
  if (lo < 0.0)
    for (double& v : f.values) v -= lo;
  return f;
}

ScalarField build_initial(const Scenario& s, const ModelProblem& model,
                          const PeriodicGrid& g) {
  if (s.initial == "random")
    return random_nonneg_field(g, s.seed, std::min(s.initial_band, g.n / 2 - 1),
                               s.initial_amplitude);
  return sample_field(g, model.initial_condition);
}

json scenario_json(const Scenario& s) {
  return json{{"model", s.model},
              {"dimension", s.dimension},
              {"half_width", s.half_width},
              {"n", s.n},
              {"T", s.horizon},
              {"seed", s.seed},
              {"time_step", s.solver.time_step},
              {"newton_tol", s.solver.newton_tol},
              {"newton_max_iter", s.solver.newton_max_iter},
              {"damping", s.solver.damping},
              {"epsilon_reg", s.solver.epsilon_reg},
              {"mollifier_width", s.solver.mollifier_width},
              {"dealias", s.solver.dealias},
              {"krylov_max_iter", s.solver.krylov_max_iter},
              {"krylov_tol", s.solver.krylov_tol},
              {"initial", s.initial},
              {"initial_amplitude", s.initial_amplitude},
              {"initial_band", s.initial_band},
              {"particles", s.particles},
              {"particle_dt", s.particle_dt},
              {"estimator", s.estimator},
              {"bandwidth", s.bandwidth},
              {"snapshots", s.snapshots},
              {"checks", s.checks},
              {"output_stride", s.output_stride}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void write_meta(const fs::path& out, const std::string& command, const Scenario& s) {
  write_json(out / "meta.json", json{{"command", command}, {"scenario", scenario_json(s)}});
}

std::string field_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "state_%06zu.f64", index);
  return buf;
}

int do_run_pde(const Scenario& s, const fs::path& out) {
  ModelProblem model = model_from(s);
  PeriodicGrid grid(s.dimension, s.half_width, s.n);
  ScalarField u0 = build_initial(s, model, grid);
  Trajectory traj = solve_regularized(u0, s.horizon, model, s.solver);

  fs::create_directories(out / "fields");
  std::ostringstream series;
  series.precision(17);
  series << "time,mass,min,max,l1,l2\n";
  double mass0 = mass(traj.fields.front());
  double drift = 0.0;
  for (std::size_t i = 0; i < traj.fields.size(); ++i) {
    const auto& f = traj.fields[i];
    auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    double m = mass(f);
    drift = std::max(drift, std::abs(m - mass0));
    series << traj.times[i] << ',' << m << ',' << *lo << ',' << *hi << ',' << norm_l1(f) << ','
           << norm_l2(f) << '\n';
  }
  write_text(out / "series.csv", series.str());

  std::ostringstream man;
  man.precision(17);
  man << "index,time,path\n";
  for (std::size_t i = 0; i < traj.fields.size(); ++i) {
    bool last = i + 1 == traj.fields.size();
    if (i % (std::size_t)s.output_stride != 0 && !last) continue;
    std::string name = field_name(i);
    write_field((out / "fields" / name).string(), traj.fields[i]);
    man << i << ',' << traj.times[i] << ',' << "fields/" + name << '\n';
  }
  write_text(out / "manifest.csv", man.str());

  const auto& uf = traj.fields.back();
  auto [lo, hi] = std::minmax_element(uf.values.begin(), uf.values.end());
  write_json(out / "summary.json", json{{"steps", traj.times.size() - 1},
                                        {"final_time", traj.times.back()},
                                        {"mass_initial", mass0},
                                        {"mass_final", mass(uf)},
                                        {"mass_drift_max", drift},
                                        {"final_min", *lo},
                                        {"final_max", *hi},
                                        {"final_l1", norm_l1(uf)}});
  write_meta(out, "run-pde", s);
  std::cout << "run-pde: " << traj.times.size() - 1 << " steps to t=" << traj.times.back()
            << ", mass drift " << drift << ", output in " << out.string() << "\n";
  return 0;
}

int do_run_particles(const Scenario& s, const fs::path& out) {
  ModelProblem model = model_from(s);
  PeriodicGrid grid(s.dimension, s.half_width, s.n);
  ScalarField u0 = build_initial(s, model, grid);
  std::vector<double> times = s.snapshots.empty() ? std::vector<double>{s.horizon}
                                                  : s.snapshots;
  auto snaps = simulate(u0, s.horizon, s.particle_dt, s.particles, s.seed, model,
                        estimator_from(s), times);

  fs::create_directories(out / "fields");
  std::ostringstream man;
  man.precision(17);
  man << "index,time,path\n";
  json masses = json::array();
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    std::string name = field_name(i);
    write_field((out / "fields" / name).string(), snaps[i].density);
    man << i << ',' << snaps[i].time << ',' << "fields/" + name << '\n';
    masses.push_back(mass(snaps[i].density));
  }
  write_text(out / "manifest.csv", man.str());
  write_json(out / "summary.json",
             json{{"particles", s.particles},
                  {"snapshots", snaps.size()},
                  {"masses", masses}});
  write_meta(out, "run-particles", s);
  std::cout << "run-particles: " << s.particles << " particles, " << snaps.size()
            << " snapshots, output in " << out.string() << "\n";
  return 0;
}

std::vector<std::string> known_checks() {
  return {"functional-inequalities", "weak-residual", "narrow-continuity",
          "gronwall",                "l1-contraction", "barrier",
          "refinement",              "particle-consistency"};
}

std::vector<std::string> parse_checks(const std::string& spec) {
  auto all = known_checks();
  if (spec == "all") return all;
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    if (std::find(all.begin(), all.end(), item) == all.end())
      throw UnknownNameError("unknown check '" + item + "'");
    out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("no checks selected");
  return out;
}

CheckResult check_functional_inequalities(const Scenario& s) {
  PeriodicGrid g(s.dimension, s.half_width, s.n);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    ScalarField f =
        synthesize_random_field(g, s.seed + (std::uint64_t)k, std::max(2, g.n / 3), 1.0);
    InequalityReport rep = check_inequalities(f);
    worst = std::max({worst, rep.gamma_ratio, rep.divergence_ratio, rep.interpolation_ratio});
  }
  return {"functional-inequalities", worst <= 1.0 + 1e-12, worst, 1.0, 1e-12,
          "20 seeded fields"};
}

CheckResult check_weak_residual(const Scenario& s) {
  ModelProblem model = model_from(s);
  PeriodicGrid g(s.dimension, s.half_width, s.n);
  ScalarField u0 = build_initial(s, model, g);
  SolverConfig fine = s.solver;
  fine.time_step *= 0.5;
  double r1 = weak_residual(solve_mild(u0, s.horizon, model, s.solver), model, 20, s.seed);
  double r2 = weak_residual(solve_mild(u0, s.horizon, model, fine), model, 20, s.seed);
  double order = r2 > 1e-300 ? std::log2(r1 / r2) : 10.0;
  bool tiny = r1 < 1e-12 && r2 < 1e-12;
  return {"weak-residual", order >= 0.9 || tiny, order, 0.9, 0.0,
          "defect " + std::to_string(r1) + " -> " + std::to_string(r2) + " under halving"};
}

CheckResult check_narrow_continuity(const Scenario& s) {
  ModelProblem model = model_from(s);
  PeriodicGrid g(s.dimension, s.half_width, s.n);
  ScalarField u0 = build_initial(s, model, g);
  std::vector<ScalarField> probes{ScalarField(g, 1.0)};
  for (int k = 0; k < 3; ++k)
    probes.push_back(synthesize_random_field(g, s.seed + 100 + (std::uint64_t)k, 6, 1.0));
  SolverConfig fine = s.solver;
  fine.time_step *= 0.5;
  double m1 = narrow_continuity_modulus(solve_mild(u0, s.horizon, model, s.solver), probes);
  double m2 = narrow_continuity_modulus(solve_mild(u0, s.horizon, model, fine), probes);
  bool tiny = m1 < 1e-12;
  bool pass = tiny || m2 <= 0.75 * m1 + 1e-12;
  return {"narrow-continuity", pass, m1 > 0 ? m2 / m1 : 0.0, 0.75, 1e-12,
          "modulus " + std::to_string(m1) + " -> " + std::to_string(m2) + " under halving"};
}

CheckResult check_gronwall(const Scenario& s) {
  ModelProblem model = model_from(s);
  PeriodicGrid g(s.dimension, s.half_width, s.n);
  int band = std::min(s.initial_band, g.n / 2 - 1);
  ScalarField a = random_nonneg_field(g, s.seed + 11, band, s.initial_amplitude);
  ScalarField b = random_nonneg_field(g, s.seed + 12, band, s.initial_amplitude);
  GronwallResult r = gronwall_check(a, b, s.horizon, model, s.solver);
  return {"gronwall-rate", r.pass, r.measured_slope, r.theoretical_constant, 1e-9,
          "closed-form constant " + std::to_string(r.theoretical_constant) +
              ", brute-force " + std::to_string(r.brute_force_constant)};
}

CheckResult check_l1_contraction(const Scenario& s) {
  ModelProblem model = model_from(s);
  PeriodicGrid g(s.dimension, s.half_width, s.n);
  int band = std::min(s.initial_band, g.n / 2 - 1);
  double worst = -1e300;
  for (int k = 0; k < 3; ++k) {
    ScalarField a = random_nonneg_field(g, s.seed + 21 + 2 * (std::uint64_t)k, band,
                                        s.initial_amplitude);
    ScalarField b = random_nonneg_field(g, s.seed + 22 + 2 * (std::uint64_t)k, band,
                                        s.initial_amplitude);
    CheckResult c = l1_contraction_check(a, b, s.horizon, model, s.solver, 1e-8);
    worst = std::max(worst, c.measured);
  }
  return {"l1-contraction", worst <= 1e-8, worst, 0.0, 1e-8, "3 seeded pairs"};
}

CheckResult check_barrier(const Scenario& s) {
  ModelProblem model = model_from(s);
  PeriodicGrid g(s.dimension, s.half_width, s.n);
  ScalarField u0 = build_initial(s, model, g);
  Trajectory traj = solve_mild(u0, s.horizon, model, s.solver);
  return barrier_check(traj, model);
}

CheckResult check_refinement(const Scenario& s) {
  ModelProblem model = model_from(s);
  std::vector<ResolutionLevel> levels{{4.0 * s.solver.time_step, std::max(s.n / 4, 16)},
                                      {2.0 * s.solver.time_step, std::max(s.n / 2, 16)},
                                      {s.solver.time_step, s.n}};
  return uniqueness_probe(model, s.half_width, s.horizon, s.solver, levels).summary;
}

CheckResult check_particle_consistency(const Scenario& s) {
  ModelProblem model = model_from(s);
  std::vector<std::size_t> counts{std::max<std::size_t>(s.particles / 100, 100),
                                  std::max<std::size_t>(s.particles / 10, 100), s.particles};
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  return pde_particle_consistency(model, s.half_width, s.n, s.horizon, s.particle_dt, counts,
                                  2, s.seed, estimator_from(s), 0.1)
      .summary;
}

int do_run_verify(const Scenario& s, const fs::path& out) {
  auto selected = parse_checks(s.checks);
  VerificationReport report;
  for (const std::string& name : selected) {
    if (name == "functional-inequalities")
      report.checks.push_back(check_functional_inequalities(s));
    else if (name == "weak-residual")
      report.checks.push_back(check_weak_residual(s));
    else if (name == "narrow-continuity")
      report.checks.push_back(check_narrow_continuity(s));
    else if (name == "gronwall")
      report.checks.push_back(check_gronwall(s));
    else if (name == "l1-contraction")
      report.checks.push_back(check_l1_contraction(s));
    else if (name == "barrier")
      report.checks.push_back(check_barrier(s));
    else if (name == "refinement")
      report.checks.push_back(check_refinement(s));
    else if (name == "particle-consistency")
      report.checks.push_back(check_particle_consistency(s));
  }
  fs::create_directories(out);
  write_text(out / "report.txt", report.to_text());
  write_text(out / "report.csv", report.to_csv());
  json failures = json::array();
  for (const auto& c : report.checks)
    if (!c.pass) failures.push_back(c.name);
  write_json(out / "summary.json", json{{"all_pass", report.all_pass()},
                                        {"n_checks", report.checks.size()},
                                        {"failures", failures}});
  write_meta(out, "run-verify", s);
  std::cout << report.to_text();
  return report.all_pass() ? 0 : 1;
}

int do_convergence(const Scenario& s, const fs::path& out, int levels) {
  if (levels < 3) throw std::invalid_argument("need at least three refinement levels");
  ModelProblem model = model_from(s);
  PeriodicGrid g(s.dimension, s.half_width, s.n);
  ScalarField u0 = build_initial(s, model, g);
  std::vector<double> steps;
  for (int k = 0; k < levels; ++k) steps.push_back(s.solver.time_step / std::pow(2.0, k));
  ConvergenceEstimate est = self_convergence(u0, s.horizon, model, s.solver, steps);

  fs::create_directories(out);
  std::ostringstream csv;
  csv.precision(17);
  csv << "time_step,distance\n";
  for (std::size_t k = 0; k < est.distances.size(); ++k)
    csv << est.step_sizes[k] << ',' << est.distances[k] << '\n';
  write_text(out / "convergence.csv", csv.str());
  write_json(out / "summary.json",
             json{{"fitted_order", est.fitted_order}, {"levels", levels}});
  write_meta(out, "convergence", s);
  std::cout << "convergence: fitted order " << est.fitted_order << ", output in "
            << out.string() << "\n";
  return 0;
}

int do_compare(const std::string& a_path, const std::string& b_path, const std::string& norm) {
  ScalarField a = read_field(a_path);
  ScalarField b = read_field(b_path);
  require_same_grid(a, b);
  ScalarField d = a - b;
  double v = 0.0;
  if (norm == "l1")
    v = norm_l1(d);
  else if (norm == "l2")
    v = norm_l2(d);
  else if (norm == "linf")
    v = norm_linf(d);
  else if (norm == "neg1")
    v = neg_sobolev_norm(d, 1);
  else if (norm == "neg2")
    v = neg_sobolev_norm(d, 2);
  else
    throw std::invalid_argument("unknown norm '" + norm + "'");
  std::cout.precision(17);
  std::cout << v << "\n";
  return 0;
}

void write_error(const fs::path& out, int code, const std::string& type,
                 const std::string& message) {
  try {
    fs::create_directories(out);
    write_json(out / "error.json",
               json{{"exit_code", code}, {"type", type}, {"message", message}});
  } catch (...) {
    // The diagnostic is best effort; the exit code still reports the failure.
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"numerical laboratory for nonlinear Fokker-Planck dynamics"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out";
  std::vector<std::string> sets;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "scenario file (key = value lines)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--set", sets, "override a scenario key, e.g. --set model=CUBIC");
  };

  CLI::App* pde = app.add_subcommand("run-pde", "integrate the implicit chain");
  add_common(pde);
  CLI::App* particles = app.add_subcommand("run-particles", "run the interacting ensemble");
  add_common(particles);
  CLI::App* verify = app.add_subcommand("run-verify", "run structural checks");
  add_common(verify);
  CLI::App* conv = app.add_subcommand("convergence", "self-convergence under step halving");
  add_common(conv);
  int levels = 3;
  conv->add_option("--levels", levels, "number of halvings (>= 3)");

  CLI::App* cmp = app.add_subcommand("compare", "distance between two stored fields");
  std::string a_path, b_path, norm = "l1";
  cmp->add_option("--a", a_path, "first field")->required();
  cmp->add_option("--b", b_path, "second field")->required();
  cmp->add_option("--norm", norm, "l1|l2|linf|neg1|neg2");
  cmp->add_option("--out", out_dir, "directory for error diagnostics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const fs::path out(out_dir);
  try {
    if (cmp->parsed()) return do_compare(a_path, b_path, norm);
    Scenario s = scenario_path.empty() ? Scenario{} : parse_scenario_file(scenario_path);
    for (const std::string& kv : sets) {
      std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      apply_assignment(s, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (pde->parsed()) return do_run_pde(s, out);
    if (particles->parsed()) return do_run_particles(s, out);
    if (verify->parsed()) return do_run_verify(s, out);
    if (conv->parsed()) return do_convergence(s, out, levels);
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    write_error(out, 2, "scenario", e.what());
    return 2;
  } catch (const UnknownNameError& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_error(out, 3, "unknown-name", e.what());
    return 3;
  } catch (const NonConvergence& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    write_error(out, 4, "non-convergence", e.what());
    return 4;
  } catch (const LinearSolveFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    write_error(out, 4, "linear-solve", e.what());
    return 4;
  } catch (const DegenerateDensity& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    write_error(out, 4, "degenerate-density", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid setup: " << e.what() << "\n";
    write_error(out, 2, "invalid-argument", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_error(out, 2, "runtime", e.what());
    return 2;
  }
}

}  // namespace fplab
