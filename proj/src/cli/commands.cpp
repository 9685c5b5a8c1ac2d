#include "qcons/cli.hpp"

#include "qcons/errors.hpp"
#include "qcons/format.hpp"
#include "qcons/parallel.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace qcons::cli {

using nlohmann::json;
using config::RunConfig;

SurfacePtr make_surface(const RunConfig& cfg, int n_particles, int j) {
  const PotentialPtr v = cfg.model.potential(n_particles);
  if (!v) return std::make_shared<FreeSurface>(n_particles);
  if (cfg.dynamics.corrected) return std::make_shared<CorrectedSurface>(v, j, cfg.dynamics.mass_scale);
  return std::make_shared<AdiabaticSurface>(v, j);
}

SurfaceFamily make_family(const RunConfig& cfg) {
  SurfaceFamily f;
  f.count = cfg.model.dim();
  f.make = [cfg](int n, int j) { return make_surface(cfg, n, j); };
  return f;
}

PhaseState initial_state(const RunConfig& cfg) {
  const auto& p = cfg.particles;
  const int n = p.count;
  if (n < 1) throw ConfigError("field 'particles.count' must be positive for dynamics");
  std::mt19937_64 rng(cfg.seed);
  PhaseState s;
  s.masses = p.masses;
  s.surface = cfg.dynamics.surface;
  if (p.positions) {
    s.x = *p.positions;
  } else {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int side = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
    const Vec3 center = p.container.kind == Container::Kind::PeriodicBox ? Vec3(0.5 * (p.container.lo + p.container.hi))
                                                                         : p.container.center;
    const Vec3 offset = center - Vec3::Constant(0.5 * (side - 1) * p.spacing);
    s.x.resize(3 * n);
    for (int i = 0; i < n; ++i) {
      const Vec3 cell(i % side, (i / side) % side, i / (side * side));
      for (int c = 0; c < 3; ++c) s.x(3 * i + c) = offset(c) + p.spacing * cell(c) + p.jitter * u(rng);
    }
  }
  if (p.momenta) {
    s.p = *p.momenta;
  } else {
    s.p = Vec::Zero(3 * n);
    if (p.temperature > 0.0) {
      std::normal_distribution<double> g(0.0, 1.0);
      for (int i = 0; i < 3 * n; ++i) s.p(i) = std::sqrt(p.masses(i / 3) * p.temperature) * g(rng);
    }
  }
  return s;
}

std::vector<Vec3> probe_points(const RunConfig& cfg, const Vec& x) {
  if (cfg.probes.explicit_box) return probe_lattice(cfg.probes.lo, cfg.probes.hi, cfg.probes.counts);
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (int k = 0; k < x.size() / 3; ++k) {
    lo = lo.cwiseMin(x.segment<3>(3 * k));
    hi = hi.cwiseMax(x.segment<3>(3 * k));
  }
  if (x.size() == 0) lo = hi = Vec3::Zero();
  return probe_lattice(lo, hi, cfg.probes.counts);
}

DynamicEnsemble sampled_ensemble(const RunConfig& cfg, int workers, json* info) {
  if (!cfg.ensemble) throw ConfigError("missing required section 'ensemble'");
  const auto& ec = *cfg.ensemble;
  const Mollifier m(cfg.epsilon);
  const SurfaceFamily family = make_family(cfg);
  const int n = cfg.particles.count;
  SamplerOptions opts = ec.sampler;
  opts.workers = workers;
  opts.grand_canonical = false;
  SurfaceWeights w;
  if (ec.weights) {
    w.q = *ec.weights;
    w.stderr_ = Vec::Zero(w.q.size());
  } else {
    w = surface_weights(ec.spec, m, family, cfg.particles.container, n, ec.weight_method, opts, ec.weight_options);
  }
  DynamicEnsemble e;
  e.groups.resize(family.count);
  e.weights.assign(w.q.data(), w.q.data() + w.q.size());
  std::vector<ChainResult> chains(family.count);
  opts.n_samples = cfg.conservation.samples_per_surface;
  parallel_for(family.count, workers, [&](int j) {
    if (w.q(j) > 0.0) chains[j] = run_chain(ec.spec, m, family, j, cfg.particles.container, n, opts);
  });
  json warnings = json::array();
  for (int j = 0; j < family.count; ++j) {
    e.groups[j] = std::move(chains[j].states);
    e.surfaces.push_back(family.make(n, j));
    for (const auto& s : chains[j].warnings) warnings.push_back(s);
  }
  if (info) {
    *info = {{"q_weights", std::vector<double>(w.q.data(), w.q.data() + w.q.size())},
             {"q_stderr", std::vector<double>(w.stderr_.data(), w.stderr_.data() + w.stderr_.size())},
             {"samples_per_surface", cfg.conservation.samples_per_surface},
             {"warnings", warnings}};
  }
  return e;
}

std::filesystem::path output_directory(const RunConfig& cfg) {
  if (const char* env = std::getenv("QCONS_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_directory;
}

namespace {

struct Context {
  RunConfig cfg;
  std::string command;
  std::string hash;
  std::filesystem::path dir;
  int workers = 1;
  std::ostream* log = nullptr;

  std::string comment() const {
    return "qcons " + command + " config_sha256=" + hash + " seed=" + std::to_string(cfg.seed);
  }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file " + (dir / name).string());
    return f;
  }

  void write_json(const std::string& name, json report) const {
    json doc = {{"command", command}, {"config_sha256", hash}, {"seed", cfg.seed}, {"report", std::move(report)}};
    auto f = open(name);
    f << doc.dump(2) << '\n';
    *log << "wrote " << (dir / name).string() << '\n';
  }

  void wrote(const std::string& name) const { *log << "wrote " << (dir / name).string() << '\n'; }
};

// Single trajectory propagated to the configured time.
std::pair<PhaseState, SurfacePtr> propagated_state(const Context& c) {
  const PhaseState s0 = initial_state(c.cfg);
  SurfacePtr surf = make_surface(c.cfg, c.cfg.particles.count, c.cfg.dynamics.surface);
  validate_state(s0);
  PhaseState s = s0;
  for (int k = 0; k < c.cfg.dynamics.steps; ++k) s = verlet_step(s, c.cfg.dynamics.dt, *surf);
  return {s, surf};
}

DynamicEnsemble propagated_ensemble(const Context& c, json* info) {
  DynamicEnsemble e = sampled_ensemble(c.cfg, c.workers, info);
  for (int k = 0; k < c.cfg.dynamics.steps; ++k) e = advance(e, c.cfg.dynamics.dt);
  return e;
}

Vec all_positions(const DynamicEnsemble& e) {
  std::vector<double> xs;
  for (const auto& g : e.groups)
    for (const auto& s : g) xs.insert(xs.end(), s.x.data(), s.x.data() + s.x.size());
  return Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

int cmd_run_md(const Context& c) {
  const PhaseState s0 = initial_state(c.cfg);
  const SurfacePtr surf = make_surface(c.cfg, c.cfg.particles.count, c.cfg.dynamics.surface);
  const Trajectory t = integrate(s0, c.cfg.dynamics.dt, c.cfg.dynamics.steps, *surf, c.cfg.dynamics.record_every);
  auto f = c.open("trajectory.csv");
  write_trajectory_csv(f, t, c.comment());
  c.wrote("trajectory.csv");
  const double e0 = t.energy.front(), e1 = t.energy.back();
  *c.log << "energy drift " << num(e1 - e0) << '\n';
  return kOk;
}

int cmd_fields(const Context& c) {
  const Mollifier m(c.cfg.epsilon);
  ProbeGrid grid;
  if (c.cfg.field_mode == FieldMode::PerTrajectory) {
    const auto [s, surf] = propagated_state(c);
    grid = field_grid(single_state(prepare_state(s, *surf)), m, probe_points(c.cfg, s.x), FieldMode::PerTrajectory,
                      s.time, c.workers);
  } else {
    const DynamicEnsemble e = propagated_ensemble(c, nullptr);
    grid = field_grid(prepare_ensemble(e), m, probe_points(c.cfg, all_positions(e)), FieldMode::Canonical,
                      c.cfg.dynamics.steps * c.cfg.dynamics.dt, c.workers);
  }
  auto f = c.open("fields.csv");
  write_probe_grid_csv(f, grid, c.comment());
  c.wrote("fields.csv");
  return kOk;
}

int cmd_conserve(const Context& c) {
  const Mollifier m(c.cfg.epsilon);
  const auto& cc = c.cfg.conservation;
  ResidualOptions ro{cc.richardson, c.workers};
  ResidualReport r;
  json info;
  bool passed = true;
  std::string criterion;
  if (cc.mode == FieldMode::PerTrajectory) {
    const auto [s, surf] = propagated_state(c);
    r = residuals(single_trajectory(s, surf), m, probe_points(c.cfg, s.x), cc.dt_check, cc.mode, ro);
    passed = scaled_max_residual(r) <= cc.tolerance;
    criterion = "max residual <= " + num(cc.tolerance) + " * field scale";
  } else {
    const DynamicEnsemble e = propagated_ensemble(c, &info);
    r = residuals(e, m, probe_points(c.cfg, all_positions(e)), cc.dt_check, cc.mode, ro);
    int failing = 0;
    for (const auto& p : r.probes) {
      if (p.masked) continue;
      auto ok = [&](double res, double se) {
        return se > 0.0 ? std::abs(res) <= cc.stderr_factor * se : std::abs(res) <= cc.tolerance * r.field_scale;
      };
      bool good = ok(p.mass, p.mass_se) && ok(p.energy, p.energy_se);
      for (int k = 0; k < 3; ++k) good = good && ok(p.mom(k), p.mom_se(k));
      if (!good) ++failing;
    }
    passed = failing == 0;
    info["failing_probes"] = failing;
    criterion = "|residual| <= " + num(cc.stderr_factor) + " * standard error at every unmasked probe";
  }
  json report = residual_report_json(r);
  report["criterion"] = criterion;
  report["passed"] = passed;
  if (!info.is_null()) report["ensemble"] = info;
  c.write_json("conserve.json", report);
  auto f = c.open("conserve.csv");
  write_residual_csv(f, r, c.comment());
  c.wrote("conserve.csv");
  *c.log << "scaled max residual " << num(scaled_max_residual(r)) << (passed ? " (pass)" : " (FAIL)") << '\n';
  return passed ? kOk : kCheckFailed;
}

json vec_json(const Vec3& v) { return {v(0), v(1), v(2)}; }

int cmd_gibbs_fit(const Context& c) {
  if (!c.cfg.ensemble) throw ConfigError("missing required section 'ensemble'");
  const auto& ec = *c.cfg.ensemble;
  const Mollifier m(c.cfg.epsilon);
  const SurfaceFamily family = make_family(c.cfg);
  SamplerOptions opts = ec.sampler;
  opts.workers = c.workers;
  MatchResult r;
  if (ec.targets)
    r = match_thermo(*ec.targets, ec.spec, m, family, c.cfg.particles.container, c.cfg.particles.count, opts,
                     ec.match);
  else
    r = estimate_observables(ec.spec, m, family, c.cfg.particles.container, c.cfg.particles.count, opts);
  const auto [beta, beta_mu] = lagrange_multipliers(r.spec);
  json report = {
      {"probe", vec_json(r.spec.probe)},
      {"T", r.spec.T},
      {"mu", r.spec.mu},
      {"u0", vec_json(r.spec.u0)},
      {"mode", r.spec.mode == GibbsMode::Uniform ? "uniform" : "local"},
      {"q_weights", std::vector<double>(r.weights.q.data(), r.weights.q.data() + r.weights.q.size())},
      {"q_stderr", std::vector<double>(r.weights.stderr_.data(), r.weights.stderr_.data() + r.weights.stderr_.size())},
      {"achieved", {{"rho", r.achieved.rho}, {"rho_u", vec_json(r.achieved.rho_u)}, {"E", r.achieved.energy}}},
      {"stderr", {{"rho", r.stderr_.rho}, {"rho_u", vec_json(r.stderr_.rho_u)}, {"E", r.stderr_.energy}}},
      {"lagrange_multipliers", {{"lambda1", beta}, {"lambda0", beta_mu}}},
      {"evaluations", r.evaluations},
      {"warnings", r.warnings}};
  c.write_json("gibbs_fit.json", report);
  return kOk;
}

const config::QuantumConfig& quantum_section(const Context& c) {
  if (!c.cfg.quantum) throw ConfigError("missing required section 'quantum'");
  return *c.cfg.quantum;
}

int cmd_egorov(const Context& c) {
  const auto& q = quantum_section(c);
  if (!q.model.v) throw ConfigError("missing required field 'quantum.potential'");
  quantum::EgorovOptions o = q.egorov;
  o.workers = c.workers;
  const auto r = quantum::egorov_test(q.model, o);
  const bool passed = q.expect_exact ? r.within_propagation_tolerance : r.passed;
  json report = quantum::egorov_report_json(r);
  report["expect"] = q.expect_exact ? "exact" : "slope";
  report["passed"] = passed;
  c.write_json("egorov.json", report);
  *c.log << "egorov slope " << num(r.slope) << (passed ? " (pass)" : " (FAIL)") << '\n';
  return passed ? kOk : kCheckFailed;
}

int cmd_commutator(const Context& c) {
  const auto& q = quantum_section(c);
  if (!q.commutator_potential) throw ConfigError("missing required section 'quantum.commutator'");
  const auto g = quantum::make_grid(q.grid_points, q.lo, q.hi, q.mass);
  const auto r = quantum::commutator_check(g, q.commutator_potential, q.symbol, q.commutator);
  c.write_json("commutator.json", quantum::commutator_report_json(r));
  *c.log << "commutator discrepancy " << num(r.discrepancy) << (r.passed ? " (pass)" : " (FAIL)") << '\n';
  return r.passed ? kOk : kCheckFailed;
}

}  // namespace

int run_command(const std::string& command, const std::string& config_text, int workers, std::ostream& log) {
  try {
    if (workers < 1) throw ConfigError("--workers must be at least 1");
    Context c;
    c.cfg = config::parse_config(config_text);
    c.command = command;
    c.hash = config::sha256_hex(config_text);
    c.workers = workers;
    c.log = &log;
    c.dir = output_directory(c.cfg);
    std::error_code ec;
    std::filesystem::create_directories(c.dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + c.dir.string() + ": " + ec.message());
    if (command == "run-md") return cmd_run_md(c);
    if (command == "fields") return cmd_fields(c);
    if (command == "conserve-check") return cmd_conserve(c);
    if (command == "gibbs-fit") return cmd_gibbs_fit(c);
    if (command == "egorov") return cmd_egorov(c);
    if (command == "commutator-check") return cmd_commutator(c);
    throw ConfigError("unknown subcommand '" + command + "'");
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const PhysicsError& e) {
    log << "physics error: " << e.what() << '\n';
    return kPhysicsFailure;
  }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conservation-law fields, Gibbs ensembles and semiclassical checks for matrix-potential dynamics"};
  int workers = 1;
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.require_subcommand(1);
  std::string path;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"run-md", "integrate one trajectory and write trajectory.csv"},
      {"fields", "evaluate fields on the probe lattice and write fields.csv"},
      {"conserve-check", "check the balance laws and write conserve.json and conserve.csv"},
      {"gibbs-fit", "match a local Gibbs ensemble to target fields and write gibbs_fit.json"},
      {"egorov", "quantum versus classical expectation study, writes egorov.json"},
      {"commutator-check", "commutator versus Poisson bracket check, writes commutator.json"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", path, "JSON configuration file")->required();
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigFailure;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "config error: cannot read " << path << '\n';
    return kConfigFailure;
  }
  std::ostringstream text;
  text << in.rdbuf();
  return run_command(app.get_subcommands().front()->get_name(), text.str(), workers, err);
}

}  // namespace qcons::cli
