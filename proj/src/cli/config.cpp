#include "qcons/config.hpp"

#include "qcons/errors.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

namespace qcons::config {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

class Node {
public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) throw ConfigError("unknown key '" + join(path_, it.key()) + "'");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const {
    if (!has(key)) throw ConfigError("missing required field '" + field(key) + "'");
    return j_.at(key);
  }
  Node child(const char* key) const { return Node(raw(key), field(key)); }
  std::string field(const char* key) const { return join(path_, key); }
  std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }

  double number(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError("field '" + field(key) + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("field '" + field(key) + "' must be finite");
    return d;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
  double positive(const char* key, double fallback) const {
    const double d = number(key, fallback);
    if (!(d > 0.0)) throw ConfigError("field '" + field(key) + "' must be positive");
    return d;
  }
  double positive(const char* key) const {
    const double d = number(key);
    if (!(d > 0.0)) throw ConfigError("field '" + field(key) + "' must be positive");
    return d;
  }
  double nonnegative(const char* key, double fallback) const {
    const double d = number(key, fallback);
    if (!(d >= 0.0)) throw ConfigError("field '" + field(key) + "' must be nonnegative");
    return d;
  }
  long integer(const char* key, long fallback, long min_value) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError("field '" + field(key) + "' must be an integer");
    const long i = v.get<long>();
    if (i < min_value) throw ConfigError("field '" + field(key) + "' must be >= " + std::to_string(min_value));
    return i;
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_boolean()) throw ConfigError("field '" + field(key) + "' must be true or false");
    return raw(key).get<bool>();
  }
  std::string choice(const char* key, const std::string& fallback, std::initializer_list<const char*> options) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_string()) throw ConfigError("field '" + field(key) + "' must be a string");
    const std::string s = raw(key).get<std::string>();
    for (const char* o : options)
      if (s == o) return s;
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
    throw ConfigError("field '" + field(key) + "' must be one of: " + list);
  }
  Vec vector(const char* key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError("field '" + field(key) + "' must be an array of numbers");
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError("field '" + field(key) + "' must be an array of numbers");
      out(i) = v[i].get<double>();
      if (!std::isfinite(out(i))) throw ConfigError("field '" + field(key) + "' must be finite");
    }
    return out;
  }
  Vec3 vec3(const char* key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const Vec v = vector(key);
    if (v.size() != 3) throw ConfigError("field '" + field(key) + "' must have 3 entries");
    return v;
  }

private:
  const json& j_;
  std::string path_;
};

template <class Fn>
auto physics(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const PhysicsError& e) {
    throw ConfigError("field '" + path + "': " + e.what());
  }
}

PairFunction parse_pair(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("field '" + path + "' must be an array of pair terms");
  PairFunction f = PairFunction::zero();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Node t(j[i], path + "[" + std::to_string(i) + "]");
    const std::string kind =
        t.choice("kind", "", {"constant", "harmonic", "morse", "lennard_jones", "gaussian"});
    const std::string p = t.field("kind");
    if (kind == "constant") {
      t.allow({"kind", "value"});
      f = f + physics(p, [&] { return PairFunction::constant(t.number("value")); });
    } else if (kind == "harmonic") {
      t.allow({"kind", "kappa", "r0"});
      f = f + physics(p, [&] { return PairFunction::harmonic(t.positive("kappa"), t.nonnegative("r0", 0.0)); });
    } else if (kind == "morse") {
      t.allow({"kind", "depth", "width", "r0"});
      f = f + physics(p, [&] {
            return PairFunction::morse(t.positive("depth"), t.positive("width"), t.positive("r0"));
          });
    } else if (kind == "lennard_jones") {
      t.allow({"kind", "epsilon", "sigma", "r_inner"});
      f = f + physics(p, [&] {
            return PairFunction::lennard_jones(t.positive("epsilon"), t.positive("sigma"), t.positive("r_inner"));
          });
    } else if (kind == "gaussian") {
      t.allow({"kind", "amplitude", "center", "width"});
      f = f + physics(p, [&] {
            return PairFunction::gaussian(t.number("amplitude"), t.number("center"), t.positive("width"));
          });
    } else {
      throw ConfigError("field '" + p + "' is required");
    }
  }
  return f;
}

ModelConfig parse_model(const Node& n) {
  ModelConfig m;
  const std::string type = n.choice("type", "", {"free", "scalar_pair", "two_state"});
  if (type == "free") {
    n.allow({"type"});
    m.type = ModelConfig::Type::Free;
  } else if (type == "scalar_pair") {
    n.allow({"type", "pair"});
    m.type = ModelConfig::Type::ScalarPair;
    m.pair = parse_pair(n.raw("pair"), n.field("pair"));
  } else if (type == "two_state") {
    n.allow({"type", "phi1", "gap", "coupling"});
    m.type = ModelConfig::Type::TwoState;
    m.two_state.phi1 = parse_pair(n.raw("phi1"), n.field("phi1"));
    m.two_state.gap = parse_pair(n.raw("gap"), n.field("gap"));
    const Node c = n.child("coupling");
    c.allow({"strength", "center", "width"});
    m.two_state.coupling_strength = c.number("strength");
    m.two_state.coupling_center = c.number("center", 1.0);
    m.two_state.coupling_width = c.positive("width", 1.0);
    physics(n.field("gap"), [&] { return make_two_state_model(2, m.two_state); });
  } else {
    throw ConfigError("field '" + n.field("type") + "' is required");
  }
  return m;
}

Container parse_container(const Node& n) {
  Container c;
  const std::string type = n.choice("type", "box", {"box", "harmonic"});
  if (type == "box") {
    n.allow({"type", "lo", "hi"});
    c.kind = Container::Kind::PeriodicBox;
    c.lo = n.vec3("lo", Vec3::Zero());
    c.hi = n.vec3("hi", Vec3::Ones());
    if (!((c.hi - c.lo).minCoeff() > 0.0)) throw ConfigError("field '" + n.field("hi") + "' must exceed lo");
  } else {
    n.allow({"type", "kappa", "center"});
    c.kind = Container::Kind::Harmonic;
    c.kappa = n.positive("kappa");
    c.center = n.vec3("center", Vec3::Zero());
  }
  return c;
}

ParticlesConfig parse_particles(const Node& n) {
  n.allow({"count", "masses", "positions", "momenta", "spacing", "jitter", "temperature", "container"});
  ParticlesConfig p;
  p.count = static_cast<int>(n.integer("count", 1, 0));
  if (!n.has("masses")) {
    p.masses = Vec::Ones(p.count);
  } else if (n.raw("masses").is_number()) {
    p.masses = Vec::Constant(p.count, n.positive("masses"));
  } else {
    p.masses = n.vector("masses");
    if (p.masses.size() != p.count) throw ConfigError("field '" + n.field("masses") + "' needs one entry per particle");
    if (!(p.masses.minCoeff() > 0.0)) throw ConfigError("field '" + n.field("masses") + "' must be positive");
  }
  if (n.has("positions")) {
    p.positions = n.vector("positions");
    if (p.positions->size() != 3 * p.count)
      throw ConfigError("field '" + n.field("positions") + "' needs 3 * count entries");
  }
  if (n.has("momenta")) {
    p.momenta = n.vector("momenta");
    if (p.momenta->size() != 3 * p.count)
      throw ConfigError("field '" + n.field("momenta") + "' needs 3 * count entries");
  }
  p.spacing = n.positive("spacing", 1.3);
  p.jitter = n.nonnegative("jitter", 0.1);
  p.temperature = n.nonnegative("temperature", 0.0);
  if (n.has("container")) {
    p.container = parse_container(n.child("container"));
  } else {
    p.container.kind = Container::Kind::Harmonic;
    p.container.kappa = 0.1;
  }
  return p;
}

FieldMode parse_mode(const Node& n, const char* key, FieldMode fallback) {
  const std::string s = n.choice(key, fallback == FieldMode::Canonical ? "canonical" : "per-trajectory",
                                 {"per-trajectory", "canonical"});
  return s == "canonical" ? FieldMode::Canonical : FieldMode::PerTrajectory;
}

// Scalar functions of one coordinate with their derivatives.
struct LinePair {
  quantum::LineFunction f, df;
};

LinePair parse_line(const json& j, const std::string& path) {
  const Node n(j, path);
  const std::string type = n.choice("type", "", {"polynomial", "fourier", "gaussian", "mollifier", "sum"});
  if (type == "polynomial") {
    n.allow({"type", "coefficients"});
    const Vec c = n.vector("coefficients");
    if (c.size() == 0) throw ConfigError("field '" + n.field("coefficients") + "' must not be empty");
    return {[c](double x) {
              double v = 0.0;
              for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) v = v * x + c(i);
              return v;
            },
            [c](double x) {
              double v = 0.0;
              for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i) v = v * x + i * c(i);
              return v;
            }};
  }
  if (type == "fourier") {
    n.allow({"type", "constant", "cos", "sin", "period"});
    const double c0 = n.number("constant", 0.0);
    const Vec a = n.has("cos") ? n.vector("cos") : Vec();
    const Vec b = n.has("sin") ? n.vector("sin") : Vec();
    const double w = 2.0 * std::numbers::pi / n.positive("period", 2.0 * std::numbers::pi);
    return {[=](double x) {
              double v = c0;
              for (int k = 0; k < a.size(); ++k) v += a(k) * std::cos((k + 1) * w * x);
              for (int k = 0; k < b.size(); ++k) v += b(k) * std::sin((k + 1) * w * x);
              return v;
            },
            [=](double x) {
              double v = 0.0;
              for (int k = 0; k < a.size(); ++k) v -= a(k) * (k + 1) * w * std::sin((k + 1) * w * x);
              for (int k = 0; k < b.size(); ++k) v += b(k) * (k + 1) * w * std::cos((k + 1) * w * x);
              return v;
            }};
  }
  if (type == "gaussian") {
    n.allow({"type", "amplitude", "center", "width"});
    const double amp = n.number("amplitude"), c = n.number("center", 0.0), wd = n.positive("width");
    return {[=](double x) { return amp * std::exp(-(x - c) * (x - c) / (2 * wd * wd)); },
            [=](double x) { return -amp * (x - c) / (wd * wd) * std::exp(-(x - c) * (x - c) / (2 * wd * wd)); }};
  }
  if (type == "mollifier") {
    n.allow({"type", "epsilon", "center"});
    const auto m = std::make_shared<Mollifier>(n.positive("epsilon"));
    const double c = n.number("center", 0.0);
    return {[m, c](double x) { return m->eval(Vec3(x - c, 0, 0)); },
            [m, c](double x) { return m->grad(Vec3(x - c, 0, 0))(0); }};
  }
  n.allow({"type", "terms"});
  const json& terms = n.raw("terms");
  if (!terms.is_array() || terms.empty()) throw ConfigError("field '" + n.field("terms") + "' must be a nonempty array");
  std::vector<LinePair> parts;
  for (std::size_t i = 0; i < terms.size(); ++i)
    parts.push_back(parse_line(terms[i], n.field("terms") + "[" + std::to_string(i) + "]"));
  return {[parts](double x) {
            double v = 0.0;
            for (const auto& p : parts) v += p.f(x);
            return v;
          },
          [parts](double x) {
            double v = 0.0;
            for (const auto& p : parts) v += p.df(x);
            return v;
          }};
}

quantum::LineModel parse_line_model(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("type") && j["type"] == "two_state_line") {
    const Node n(j, path);
    n.allow({"type", "v11", "v22", "coupling"});
    const LinePair a = parse_line(n.raw("v11"), n.field("v11"));
    const LinePair b = parse_line(n.raw("v22"), n.field("v22"));
    const LinePair c = parse_line(n.raw("coupling"), n.field("coupling"));
    quantum::LineModel m;
    m.dim = 2;
    m.v = [=](double x) {
      CMat v(2, 2);
      v << a.f(x), c.f(x), c.f(x), b.f(x);
      return v;
    };
    m.dv = [=](double x) {
      CMat v(2, 2);
      v << a.df(x), c.df(x), c.df(x), b.df(x);
      return v;
    };
    return m;
  }
  const LinePair p = parse_line(j, path);
  return quantum::scalar_line_model(p.f, p.df);
}

QuantumConfig parse_quantum(const Node& n) {
  n.allow({"potential", "egorov", "commutator"});
  QuantumConfig q;
  if (n.has("potential")) q.model = parse_line_model(n.raw("potential"), n.field("potential"));
  if (n.has("egorov")) {
    const Node e = n.child("egorov");
    e.allow({"masses", "tau", "x0", "p0", "surface", "lo", "hi", "min_points", "max_points", "observable",
             "wigner_nodes", "classical_steps", "packets", "packet_temperature", "slope_threshold", "expect",
             "table_points"});
    auto& o = q.egorov;
    if (e.has("masses")) {
      const Vec m = e.vector("masses");
      if (m.size() < 2 || !(m.minCoeff() > 0.0))
        throw ConfigError("field '" + e.field("masses") + "' needs at least two positive masses");
      o.masses.assign(m.data(), m.data() + m.size());
    }
    o.tau = e.nonnegative("tau", o.tau);
    o.x0 = e.number("x0", o.x0);
    o.p0 = e.number("p0", o.p0);
    o.surface = static_cast<int>(e.integer("surface", 0, 0));
    o.lo = e.number("lo", o.lo);
    o.hi = e.number("hi", o.hi);
    if (!(o.hi > o.lo)) throw ConfigError("field '" + e.field("hi") + "' must exceed lo");
    o.min_points = static_cast<int>(e.integer("min_points", o.min_points, 8));
    o.max_points = static_cast<int>(e.integer("max_points", o.max_points, 8));
    if (e.has("observable")) o.observable = parse_line(e.raw("observable"), e.field("observable")).f;
    o.wigner_nodes = static_cast<int>(e.integer("wigner_nodes", o.wigner_nodes, 2));
    o.classical_steps = static_cast<int>(e.integer("classical_steps", o.classical_steps, 1));
    o.packets = static_cast<int>(e.integer("packets", 1, 1));
    if (o.packets != 1 && o.packets != 16) throw ConfigError("field '" + e.field("packets") + "' must be 1 or 16");
    o.packet_temperature = e.positive("packet_temperature", o.packet_temperature);
    o.slope_threshold = e.number("slope_threshold", o.slope_threshold);
    o.table_points = static_cast<int>(e.integer("table_points", o.table_points, 8));
    q.expect_exact = e.choice("expect", "slope", {"slope", "exact"}) == "exact";
  }
  if (n.has("commutator")) {
    const Node c = n.child("commutator");
    c.allow({"grid_points", "lo", "hi", "mass", "potential", "symbol", "band_fraction", "tolerance",
             "negative_control"});
    q.grid_points = static_cast<int>(c.integer("grid_points", q.grid_points, 8));
    q.lo = c.number("lo", q.lo);
    q.hi = c.number("hi", q.hi);
    if (!(q.hi > q.lo)) throw ConfigError("field '" + c.field("hi") + "' must exceed lo");
    q.mass = c.positive("mass", q.mass);
    q.commutator_potential = parse_line(c.raw("potential"), c.field("potential")).f;
    const json& sym = c.raw("symbol");
    if (!sym.is_array() || sym.empty()) throw ConfigError("field '" + c.field("symbol") + "' must be a nonempty array");
    for (std::size_t i = 0; i < sym.size(); ++i) {
      const Node t(sym[i], c.field("symbol") + "[" + std::to_string(i) + "]");
      t.allow({"degree", "a"});
      q.symbol.push_back({static_cast<int>(t.integer("degree", 0, 0)), parse_line(t.raw("a"), t.field("a")).f});
    }
    q.commutator.band_fraction = c.positive("band_fraction", q.commutator.band_fraction);
    if (q.commutator.band_fraction > 1.0) throw ConfigError("field '" + c.field("band_fraction") + "' must be <= 1");
    q.commutator.tolerance = c.positive("tolerance", q.commutator.tolerance);
    q.commutator.negative_control = c.boolean("negative_control", false);
  }
  return q;
}

EnsembleConfig parse_ensemble(const Node& n, const RunConfig& rc) {
  n.allow({"T", "mu", "u0", "mode", "eta_floor", "probe", "n_samples", "burn_in", "thin", "initial_step",
           "grand_canonical", "particle_mass", "weights", "quadrature_points", "batches", "targets", "tolerance"});
  EnsembleConfig e;
  e.spec.T = n.positive("T", 1.0);
  e.spec.mu = n.number("mu", 0.0);
  e.spec.u0 = n.vec3("u0", Vec3::Zero());
  e.spec.mode = n.choice("mode", "uniform", {"uniform", "local"}) == "local" ? GibbsMode::LocalMollified
                                                                             : GibbsMode::Uniform;
  e.spec.eta_floor = n.nonnegative("eta_floor", 0.0);
  e.spec.probe = n.vec3("probe", Vec3::Zero());
  auto& s = e.sampler;
  s.seed = rc.seed;
  s.n_samples = static_cast<int>(n.integer("n_samples", 1000, 2));
  s.burn_in = n.integer("burn_in", -1, -1);
  s.thin = static_cast<int>(n.integer("thin", 1, 1));
  s.initial_step = n.positive("initial_step", 0.5);
  s.grand_canonical = n.boolean("grand_canonical", false);
  s.particle_mass = n.positive("particle_mass", rc.particles.masses.size() ? rc.particles.masses(0) : 1.0);
  if (n.has("weights")) {
    const json& w = n.raw("weights");
    if (w.is_string()) {
      const std::string m = n.choice("weights", "reweighting", {"direct", "reweighting"});
      e.weight_method = m == "direct" ? WeightMethod::DirectQuadrature : WeightMethod::Reweighting;
    } else {
      Vec q = n.vector("weights");
      if (q.size() != rc.model.dim() || !(q.minCoeff() >= 0.0) || !(q.sum() > 0.0))
        throw ConfigError("field '" + n.field("weights") + "' needs one nonnegative weight per surface");
      e.weights = q / q.sum();
    }
  }
  e.weight_options.quadrature_points = static_cast<int>(n.integer("quadrature_points", 24, 2));
  e.weight_options.batches = static_cast<int>(n.integer("batches", 20, 2));
  if (n.has("targets")) {
    const Node t = n.child("targets");
    t.allow({"probe", "rho", "rho_u", "energy"});
    ThermoTargets tt;
    tt.probe = t.vec3("probe", e.spec.probe);
    tt.rho = t.positive("rho");
    tt.rho_u = t.vec3("rho_u", Vec3::Zero());
    tt.energy = t.number("energy");
    e.targets = tt;
  }
  e.match.tolerance = n.positive("tolerance", e.match.tolerance);
  return e;
}

}  // namespace

PotentialPtr ModelConfig::potential(int n_particles) const {
  switch (type) {
    case Type::Free:
      return nullptr;
    case Type::ScalarPair:
      return make_scalar_pair_model(n_particles, pair);
    case Type::TwoState:
      return make_two_state_model(n_particles, two_state);
  }
  return nullptr;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  const Node root(j, "");
  root.allow({"description", "seed", "model", "particles", "mollifier", "dynamics", "probes", "fields",
              "conservation", "ensemble", "quantum", "outputs"});
  RunConfig rc;
  if (root.has("seed")) {
    if (!root.raw("seed").is_number_unsigned()) throw ConfigError("field 'seed' must be a nonnegative integer");
    rc.seed = root.raw("seed").get<std::uint64_t>();
  }
  if (root.has("description") && !root.raw("description").is_string())
    throw ConfigError("field 'description' must be a string");
  if (root.has("outputs")) {
    const Node o = root.child("outputs");
    o.allow({"directory"});
    if (o.has("directory")) {
      if (!o.raw("directory").is_string()) throw ConfigError("field 'outputs.directory' must be a string");
      rc.output_directory = o.raw("directory").get<std::string>();
    }
  }
  if (root.has("model")) rc.model = parse_model(root.child("model"));
  if (root.has("particles")) {
    rc.particles = parse_particles(root.child("particles"));
  } else {
    rc.particles.masses = Vec::Ones(1);
    rc.particles.container.kind = Container::Kind::Harmonic;
    rc.particles.container.kappa = 0.1;
  }
  if (root.has("mollifier")) {
    const Node m = root.child("mollifier");
    m.allow({"epsilon"});
    rc.epsilon = m.positive("epsilon");
  }
  if (root.has("dynamics")) {
    const Node d = root.child("dynamics");
    d.allow({"dt", "steps", "surface", "corrected", "mass_scale", "record_every"});
    rc.dynamics.dt = d.positive("dt", rc.dynamics.dt);
    rc.dynamics.steps = static_cast<int>(d.integer("steps", 0, 0));
    rc.dynamics.surface = static_cast<int>(d.integer("surface", 0, 0));
    if (rc.dynamics.surface >= rc.model.dim())
      throw ConfigError("field 'dynamics.surface' exceeds the number of surfaces");
    rc.dynamics.corrected = d.boolean("corrected", false);
    rc.dynamics.mass_scale = d.positive("mass_scale", rc.dynamics.mass_scale);
    rc.dynamics.record_every = static_cast<int>(d.integer("record_every", 1, 1));
  }
  if (root.has("probes")) {
    const Node p = root.child("probes");
    p.allow({"lo", "hi", "counts"});
    rc.probes.explicit_box = p.has("lo") || p.has("hi");
    if (rc.probes.explicit_box && !(p.has("lo") && p.has("hi")))
      throw ConfigError("fields 'probes.lo' and 'probes.hi' must be given together");
    rc.probes.lo = p.vec3("lo", Vec3::Zero());
    rc.probes.hi = p.vec3("hi", rc.probes.lo);
    if (p.has("counts")) {
      const Vec c = p.vector("counts");
      if (c.size() != 3) throw ConfigError("field 'probes.counts' must have 3 entries");
      for (int i = 0; i < 3; ++i) {
        if (c(i) < 1 || c(i) != std::floor(c(i))) throw ConfigError("field 'probes.counts' must hold positive integers");
        rc.probes.counts[i] = static_cast<int>(c(i));
      }
    }
  }
  if (root.has("fields")) {
    const Node f = root.child("fields");
    f.allow({"mode"});
    rc.field_mode = parse_mode(f, "mode", FieldMode::PerTrajectory);
  }
  if (root.has("conservation")) {
    const Node c = root.child("conservation");
    c.allow({"dt_check", "mode", "tolerance", "stderr_factor", "samples_per_surface", "richardson"});
    auto& cc = rc.conservation;
    cc.dt_check = c.positive("dt_check", cc.dt_check);
    cc.mode = parse_mode(c, "mode", FieldMode::PerTrajectory);
    cc.tolerance = c.positive("tolerance", cc.tolerance);
    cc.stderr_factor = c.positive("stderr_factor", cc.stderr_factor);
    cc.samples_per_surface = static_cast<int>(c.integer("samples_per_surface", cc.samples_per_surface, 2));
    cc.richardson = c.boolean("richardson", true);
  }
  if (root.has("ensemble")) rc.ensemble = parse_ensemble(root.child("ensemble"), rc);
  if (root.has("quantum")) rc.quantum = parse_quantum(root.child("quantum"));
  return rc;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace qcons::config
