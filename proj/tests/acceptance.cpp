// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when every criterion passes.
#include "qcons/cli.hpp"
#include "qcons/conservation.hpp"
#include "qcons/ensemble.hpp"
#include "qcons/errors.hpp"
#include "qcons/format.hpp"
#include "qcons/geometry.hpp"
#include "qcons/nonlinear_eigen.hpp"
#include "qcons/quantum_oracle.hpp"
#include "test_util.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

using namespace qcons;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

// Worst |sum_n lambda^n - lambda| seen while evaluating criteria 1-3.
double g_partition_defect = 0.0;
long g_partition_configs = 0;

void record_partition(const MatrixPotential& v, const Vec& x, double mass) {
  const auto eig = eigendecompose(v.eval(x));
  const Mat bare = surface_partition(v, x, eig);
  double d = (bare.colwise().sum().transpose() - eig.lambdas).cwiseAbs().maxCoeff();
  if (mass > 0.0) {
    const auto cs = solve_nonlinear_eigen(v, x, mass);
    d = std::max(d, (cs.per_particle_bar.colwise().sum().transpose() - cs.lambdas_bar).cwiseAbs().maxCoeff());
  }
  g_partition_defect = std::max(g_partition_defect, d);
  ++g_partition_configs;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_text(const std::string& name) { return slurp(fs::path(QCONS_CONFIG_DIR) / name); }

int hardware_workers() { return std::max(1, std::min(8, static_cast<int>(std::thread::hardware_concurrency()))); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Vec3> box_probes(const Vec& x, const std::array<int, 3>& counts) {
  Vec3 lo = Vec3::Constant(1e300), hi = -lo;
  for (int k = 0; k < x.size() / 3; ++k) {
    lo = lo.cwiseMin(x.segment<3>(3 * k));
    hi = hi.cwiseMax(x.segment<3>(3 * k));
  }
  std::vector<Vec3> out;
  for (int i = 0; i < counts[0]; ++i)
    for (int j = 0; j < counts[1]; ++j)
      for (int k = 0; k < counts[2]; ++k) {
        const Vec3 t((i + 0.5) / counts[0], (j + 0.5) / counts[1], (k + 0.5) / counts[2]);
        out.push_back(lo + t.cwiseProduct(hi - lo));
      }
  return out;
}

std::shared_ptr<PairMatrixPotential> two_state(int n) {
  TwoStateParams p;
  p.phi1 = PairFunction::morse(1.0, 1.2, 1.4);
  p.gap = PairFunction::constant(0.15);
  p.coupling_strength = 0.25;
  p.coupling_center = 1.3;
  p.coupling_width = 0.6;
  return make_two_state_model(n, p);
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = 8;
  const auto v = make_scalar_pair_model(n, PairFunction::morse(1.0, 1.2, 1.3));
  auto surface = std::make_shared<AdiabaticSurface>(v, 0);
  config::RunConfig cfg = config::parse_config(config_text("morse_cluster.json"));
  PhaseState s = cli::initial_state(cfg);
  for (int k = 0; k < 200; ++k) {
    s = verlet_step(s, 1e-3, *surface);
    if (k % 20 == 0) record_partition(*v, s.x, 0.0);
  }
  // Support radius 1.4 around a probe at spacing 1.3 holds about three particles.
  const Mollifier m(1.4);
  const auto probes = box_probes(s.x, {5, 5, 8});
  const auto r = residuals(single_trajectory(s, surface), m, probes, 1e-4, FieldMode::PerTrajectory, {true, 1});
  const double secs = seconds_since(t0);
  const double tol = 1e-6 * r.field_scale;
  const double fm = std::pow(2.0, r.order_mass), fp = std::pow(2.0, r.order_mom), fe = std::pow(2.0, r.order_energy);
  auto in_band = [](double f) { return f >= 3.5 && f <= 4.5; };
  const bool ok = r.mass.max <= tol && r.mom.max <= tol && r.energy.max <= tol && in_band(fm) && in_band(fp) &&
                  in_band(fe) && secs <= 60.0 && r.probes.size() == 200;
  std::ostringstream d;
  d << "probes=" << r.probes.size() << " scale=" << num(r.field_scale) << " max/scale mass=" << r.mass.max / r.field_scale
    << " mom=" << r.mom.max / r.field_scale << " energy=" << r.energy.max / r.field_scale << " halving factors " << fm
    << " " << fp << " " << fe << " time=" << secs << "s";
  return {ok, d.str()};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const int workers = hardware_workers();
  const config::RunConfig cfg = config::parse_config(config_text("two_state_canonical.json"));
  nlohmann::json info;
  DynamicEnsemble e = cli::sampled_ensemble(cfg, workers, &info);
  const auto v = cfg.model.potential(cfg.particles.count);
  for (const auto& g : e.groups)
    for (std::size_t i = 0; i < g.size(); i += 8) record_partition(*v, g[i].x, cfg.dynamics.mass_scale);
  for (int k = 0; k < cfg.dynamics.steps; ++k) e = advance(e, cfg.dynamics.dt);
  Vec all(0);
  std::vector<double> xs;
  for (const auto& g : e.groups)
    for (const auto& s : g) xs.insert(xs.end(), s.x.data(), s.x.data() + s.x.size());
  all = Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const Mollifier m(cfg.epsilon);
  const auto r = residuals(e, m, box_probes(all, cfg.probes.counts), cfg.conservation.dt_check, FieldMode::Canonical,
                           {true, workers});
  double worst = 0.0;
  int failing = 0, live = 0;
  for (const auto& p : r.probes) {
    if (p.masked) continue;
    ++live;
    auto ratio = [](double res, double se) { return se > 0.0 ? std::abs(res) / se : (res == 0.0 ? 0.0 : 1e300); };
    double w = std::max(ratio(p.mass, p.mass_se), ratio(p.energy, p.energy_se));
    for (int k = 0; k < 3; ++k) w = std::max(w, ratio(p.mom(k), p.mom_se(k)));
    worst = std::max(worst, w);
    if (w > 5.0) ++failing;
  }
  const double secs = seconds_since(t0);
  const auto q = info["q_weights"];
  const bool two_surfaces = e.groups.size() == 2 && e.groups[0].size() == 256 && e.groups[1].size() == 256 &&
                            q[0].get<double>() > 0.0 && q[1].get<double>() > 0.0;
  const bool ok = two_surfaces && live > 0 && failing == 0 && secs <= 600.0;
  std::ostringstream d;
  d << "q=(" << q[0].get<double>() << ", " << q[1].get<double>() << ") unmasked=" << live
    << " max |r|/se=" << worst << " failing=" << failing << " workers=" << workers << " time=" << secs << "s";
  return {ok, d.str()};
}

Outcome criterion3() {
  std::mt19937_64 rng(2024);
  const int n = 4;
  auto v = two_state(n);
  NonlinearEigenOptions cont;
  cont.mode = NonlinearEigenOptions::Mode::Continuation;
  double worst_residual = 0.0, worst_mode = 0.0, lo_ratio = 1e300, hi_ratio = 0.0;
  for (int c = 0; c < 100; ++c) {
    const Vec x = lattice_config(rng, n, 1.35, 0.3);
    const CMat vx = v->eval(x);
    const Vec bare = eigendecompose(vx).lambdas;
    for (double mass : {1e2, 1e3, 1e4}) {
      const auto fp = solve_nonlinear_eigen(*v, x, mass);
      const auto ct = solve_nonlinear_eigen(*v, x, mass, cont);
      const auto doubled = solve_nonlinear_eigen(*v, x, 2.0 * mass);
      worst_residual = std::max({worst_residual, fp.residual_norm / vx.norm(), ct.residual_norm / vx.norm()});
      worst_mode = std::max(worst_mode, (fp.lambdas_bar - ct.lambdas_bar).cwiseAbs().maxCoeff());
      const double ratio = (fp.lambdas_bar - bare).norm() / (doubled.lambdas_bar - bare).norm();
      lo_ratio = std::min(lo_ratio, ratio);
      hi_ratio = std::max(hi_ratio, ratio);
    }
    record_partition(*v, x, 1e3);
  }
  const bool ok = worst_residual <= 1e-10 && worst_mode <= 1e-9 && lo_ratio >= 1.8 && hi_ratio <= 2.2;
  std::ostringstream d;
  d << "configs=100 max residual/|V|=" << worst_residual << " halving ratio in [" << lo_ratio << ", " << hi_ratio
    << "] fixed-point vs continuation=" << worst_mode;
  return {ok, d.str()};
}

Outcome criterion4() {
  const bool ok = g_partition_configs > 0 && g_partition_defect <= 1e-10;
  std::ostringstream d;
  d << "configurations=" << g_partition_configs << " max |sum_n lambda^n - lambda|=" << g_partition_defect;
  return {ok, d.str()};
}

Outcome criterion5() {
  std::mt19937_64 rng(99);
  const PairFunction phi = PairFunction::morse(1.0, 1.2, 1.3);
  double chain = 0.0, analytic = 0.0, kernel = 0.0;
  int unique = 0, total = 0;
  for (int n = 2; n <= 8; ++n) {
    auto surface = AdiabaticSurface(make_scalar_pair_model(n, phi), 0);
    for (int shape = 0; shape < 3; ++shape)
      for (int trial = 0; trial < 4; ++trial) {
        Vec x = lattice_config(rng, n, 1.3, 0.25);
        for (int i = 0; i < n; ++i) {
          if (shape >= 1) x(3 * i + 2) = 0.0;
          if (shape == 2) {
            x(3 * i + 1) = 0.0;
            x(3 * i) = 1.3 * i + 0.2 * (trial - 1.5) * (i % 2);
          }
        }
        const Vec g = surface.gradient(x);
        const Vec lifted = geometry::lift_gradient_to_distances(x, g);
        const Mat jt = geometry::distance_jacobian(x).transpose();
        chain = std::max(chain, (jt * lifted - g).norm() / std::max(1.0, g.norm()));
        const Vec r = geometry::pair_distances(x);
        Vec exact(r.size());
        for (int p = 0; p < r.size(); ++p) exact(p) = phi.deriv(r(p));
        Eigen::JacobiSVD<Mat> svd(jt);
        const auto& sv = svd.singularValues();
        const int rank = static_cast<int>((sv.array() > geometry::kLiftCutoff * sv(0)).count());
        ++total;
        if (rank == r.size()) {
          ++unique;
          analytic = std::max(analytic, (lifted - exact).cwiseAbs().maxCoeff());
        } else {
          // Dependent distances: the analytic derivatives differ from the lift by a null vector.
          kernel = std::max(kernel, (jt * (lifted - exact)).norm() / std::max(1.0, g.norm()));
        }
      }
  }
  const bool ok = chain <= 1e-10 && analytic <= 1e-8 && kernel <= 1e-10;
  std::ostringstream d;
  d << "configurations=" << total << " chain-rule residual=" << chain << " |lift - phi'| (" << unique
    << " full-rank)=" << analytic << " null-space defect (" << total - unique << " rank-deficient)=" << kernel;
  return {ok, d.str()};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  using namespace quantum;
  const Grid g = make_grid(256, -std::numbers::pi, std::numbers::pi, 100.0);
  const auto v = [](double x) { return 0.5 * std::cos(x) + 0.2 * std::cos(2 * x) + 0.1 * std::sin(3 * x); };
  const auto a = [](double x) { return 1.0 + 0.3 * std::cos(x) + 0.2 * std::sin(2 * x); };
  double worst = 0.0;
  for (int d = 0; d <= 2; ++d) worst = std::max(worst, commutator_check(g, v, {{d, a}}).discrepancy);
  CommutatorOptions control;
  control.negative_control = true;
  const double cubic = commutator_check(g, v, {{3, a}}, control).discrepancy;
  const double secs = seconds_since(t0);
  const bool ok = worst <= 1e-8 && cubic >= 1e-3 && secs <= 30.0;
  std::ostringstream d;
  d << "grid=256 max discrepancy degrees 0-2=" << worst << " degree 3=" << cubic << " time=" << secs << "s";
  return {ok, d.str()};
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  using namespace quantum;
  EgorovOptions o;
  o.workers = hardware_workers();
  const auto quartic = egorov_test(
      scalar_line_model([](double x) { return 0.5 * x * x + 0.25 * x * x * x * x; },
                        [](double x) { return x + x * x * x; }),
      o);
  o.p0 = 0.5;
  const auto harmonic = egorov_test(scalar_line_model([](double x) { return 0.5 * x * x; }, [](double x) { return x; }), o);
  const double secs = seconds_since(t0);
  const bool ok = quartic.slope <= -0.8 && harmonic.within_propagation_tolerance && secs <= 300.0;
  std::ostringstream d;
  d << "quartic errors";
  for (const auto& p : quartic.points) d << " " << p.error;
  d << " slope=" << quartic.slope << "; harmonic errors";
  for (const auto& p : harmonic.points) d << " " << p.error << "(tol " << 10 * p.propagation_error + 1e-12 << ")";
  d << " time=" << secs << "s";
  return {ok, d.str()};
}

Outcome criterion8() {
  std::ostringstream d;
  bool ok = true;
  {
    const Mollifier m(0.8);
    const double n_target = 0.4, t_target = 0.9;
    ThermoTargets t;
    t.probe = Vec3::Constant(1.5);
    t.rho = n_target;
    t.energy = 1.5 * n_target * t_target;
    GibbsSpec tmpl;
    tmpl.T = 0.6;
    tmpl.mu = -1.0;
    SamplerOptions o;
    o.n_samples = 100000;
    o.grand_canonical = true;
    o.burn_in = 20000;
    o.seed = 11;
    Container box;
    box.kind = Container::Kind::PeriodicBox;
    box.lo = Vec3::Zero();
    box.hi = Vec3::Constant(3.0);
    SurfaceFamily free;
    free.count = 1;
    free.make = [](int n, int) { return std::make_shared<FreeSurface>(n); };
    const MatchResult r = match_thermo(t, tmpl, m, free, box, 0, o, {});
    const double mu_exact = t_target * std::log(n_target * std::pow(2 * std::numbers::pi * t_target, -1.5));
    const double et = std::abs(r.spec.T - t_target) / t_target, em = std::abs(r.spec.mu - mu_exact) / std::abs(mu_exact);
    ok = ok && et <= 0.02 && em <= 0.02;
    d << "ideal gas T=" << r.spec.T << " (rel " << et << ") mu=" << r.spec.mu << " vs " << mu_exact << " (rel " << em
      << ");";
  }
  {
    class Constant : public Surface {
    public:
      Constant(int n, double c, int j) : n_(n), c_(c), j_(j) {}
      int particles() const override { return n_; }
      int index() const override { return j_; }
      double energy(const Vec&) const override { return n_ * c_; }
      Vec gradient(const Vec& x) const override { return Vec::Zero(x.size()); }
      Vec partition(const Vec&) const override { return Vec::Constant(n_, c_); }

    private:
      int n_;
      double c_;
      int j_;
    };
    const Mollifier m(0.5);
    GibbsSpec spec;
    spec.T = 0.5;
    SamplerOptions o;
    o.n_samples = 20000;
    const int n = 3;
    const double delta = 0.05;
    const auto fam = constant_family({std::make_shared<Constant>(n, 0.0, 0), std::make_shared<Constant>(n, delta, 1)});
    Container box;
    box.kind = Container::Kind::PeriodicBox;
    box.lo = Vec3::Zero();
    box.hi = Vec3::Constant(2.0);
    const auto w = surface_weights(spec, m, fam, box, n, WeightMethod::Reweighting, o, {});
    const double expected = std::exp(-n * delta / spec.T), got = w.q(1) / w.q(0);
    const double rel = std::abs(got - expected) / expected;
    ok = ok && rel <= 0.02;
    d << " gap q2/q1=" << got << " vs " << expected << " (rel " << rel << ");";
  }
  {
    const Mollifier m(0.5);
    GibbsSpec spec;
    spec.T = 1.0;
    const auto fam = constant_family({std::make_shared<HarmonicWellSurface>(1, 1.0, Vec3::Zero(), 0.0, 0),
                                      std::make_shared<HarmonicWellSurface>(1, 1.5, Vec3(0.3, 0, 0), 0.2, 1)});
    Container box;
    box.lo = Vec3::Constant(-3.0);
    box.hi = Vec3::Constant(3.0);
    SamplerOptions o;
    o.n_samples = 100000;
    o.seed = 1;
    const auto direct = surface_weights(spec, m, fam, box, 1, WeightMethod::DirectQuadrature, o, {});
    const auto rw = surface_weights(spec, m, fam, box, 1, WeightMethod::Reweighting, o, {});
    const double se = std::hypot(direct.stderr_(1), rw.stderr_(1));
    const double z = std::abs(direct.q(1) - rw.q(1)) / se;
    ok = ok && z <= 3.0;
    d << " N=1 direct q1=" << direct.q(1) << " reweighted q1=" << rw.q(1) << " (" << z << " sigma)";
  }
  return {ok, d.str()};
}

Outcome criterion9() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"run-md", "morse_cluster.json"},          {"fields", "morse_cluster.json"},
      {"conserve-check", "morse_cluster.json"},  {"gibbs-fit", "ideal_gas_fit.json"},
      {"egorov", "egorov_harmonic.json"},        {"commutator-check", "commutator_mass.json"}};
  const fs::path root = fs::temp_directory_path() / "qcons_acceptance_determinism";
  int identical = 0, files = 0;
  std::string mismatch;
  for (const auto& [cmd, cfg] : runs) {
    const std::string text = config_text(cfg);
    std::array<fs::path, 2> dirs{root / (cmd + "_a"), root / (cmd + "_b")};
    for (int k = 0; k < 2; ++k) {
      fs::remove_all(dirs[k]);
      setenv("QCONS_OUTPUT_DIR", dirs[k].c_str(), 1);
      std::ostringstream log;
      const int code = cli::run_command(cmd, text, k == 0 ? 1 : hardware_workers(), log);
      unsetenv("QCONS_OUTPUT_DIR");
      if (code != cli::kOk) mismatch += " " + cmd + " exit " + std::to_string(code);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      const fs::path other = dirs[1] / entry.path().filename();
      if (fs::exists(other) && slurp(entry.path()) == slurp(other))
        ++identical;
      else
        mismatch += " " + cmd + "/" + entry.path().filename().string();
    }
  }
  const bool ok = files > 0 && identical == files && mismatch.empty();
  std::ostringstream d;
  d << "subcommands=" << runs.size() << " files=" << files << " identical=" << identical
    << " (second run with " << hardware_workers() << " workers)" << (mismatch.empty() ? "" : " problems:" + mismatch);
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::cout << "criterion " << i + 1 << ": " << (o.passed ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
