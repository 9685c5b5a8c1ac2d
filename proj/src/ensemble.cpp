#include "qcons/ensemble.hpp"

#include "qcons/errors.hpp"
#include "qcons/format.hpp"
#include "qcons/parallel.hpp"
#include "qcons/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace qcons {

double Container::volume() const {
  if (kind != Kind::PeriodicBox) throw InvalidParameterError("volume is defined for periodic boxes only");
  return (hi - lo).prod();
}

double Container::energy(const Vec& x) const {
  if (kind == Kind::PeriodicBox) return 0.0;
  double e = 0.0;
  for (int n = 0; n < x.size() / 3; ++n) e += 0.5 * kappa * (x.segment<3>(3 * n) - center).squaredNorm();
  return e;
}

SurfaceFamily constant_family(std::vector<SurfacePtr> surfaces) {
  if (surfaces.empty()) throw InvalidParameterError("surface family needs at least one surface");
  SurfaceFamily f;
  f.count = static_cast<int>(surfaces.size());
  f.make = [surfaces](int n, int j) {
    if (surfaces[j]->particles() != n)
      throw InvalidParameterError("fixed surface family cannot change the particle count");
    return surfaces[j];
  };
  return f;
}

void validate_spec(const GibbsSpec& spec, const Mollifier& m) {
  if (!(spec.T > 0.0) || !std::isfinite(spec.T)) throw InvalidParameterError("temperature must be positive");
  if (!std::isfinite(spec.mu) || !spec.u0.allFinite() || !spec.probe.allFinite())
    throw InvalidParameterError("Gibbs parameters must be finite");
  if (spec.mode == GibbsMode::LocalMollified) {
    const double peak = m.eval(Vec3::Zero());
    if (spec.eta_floor < 0.0 || spec.eta_floor > peak)
      throw InvalidParameterError("eta_floor must lie in (0, eta(0)]");
  }
}

namespace {

double floor_of(const GibbsSpec& spec, const Mollifier& m) {
  return spec.eta_floor > 0.0 ? spec.eta_floor : 1e-3 * m.eval(Vec3::Zero());
}

}  // namespace

double gibbs_weight(const GibbsSpec& spec, const Mollifier& m, const Vec3& xn) {
  if (spec.mode == GibbsMode::Uniform) return 1.0;
  return std::max(m.eval(spec.probe - xn), floor_of(spec, m));
}

double gibbs_energy(const PhaseState& s, const GibbsSpec& spec, const Vec& partition, const Mollifier& m) {
  double h = 0.0;
  for (int n = 0; n < s.masses.size(); ++n) {
    const double mass = s.masses(n);
    const Vec3 dp = s.p.segment<3>(3 * n) - mass * spec.u0;
    h += gibbs_weight(spec, m, s.x.segment<3>(3 * n)) *
         (dp.squaredNorm() / (2.0 * mass) + partition(n) - mass * spec.mu);
  }
  return h;
}

std::pair<double, double> lagrange_multipliers(const GibbsSpec& spec) { return {1.0 / spec.T, spec.mu / spec.T}; }

double metropolis_probability(double delta_energy, double temperature) {
  if (delta_energy <= 0.0) return 1.0;
  return std::exp(-delta_energy / temperature);
}

namespace {

class SurfaceCache {
public:
  explicit SurfaceCache(const SurfaceFamily& f) : family_(f) {}
  const Surface& get(int n, int j) {
    auto& slot = cache_[{n, j}];
    if (!slot) slot = family_.make(n, j);
    return *slot;
  }

private:
  const SurfaceFamily& family_;
  std::map<std::pair<int, int>, SurfacePtr> cache_;
};

// Position part of the Gibbs exponent after integrating out the momenta.
double position_energy(const GibbsSpec& spec, const Mollifier& m, const Surface& surface, const Container& box,
                       const Vec& x, double mass) {
  const int n = static_cast<int>(x.size() / 3);
  double e = box.energy(x) - (spec.mode == GibbsMode::Uniform ? n * mass * spec.mu : 0.0);
  if (n == 0) return e;
  if (spec.mode == GibbsMode::Uniform) return e + surface.energy(x);
  const Vec part = surface.partition(x);
  for (int k = 0; k < n; ++k) {
    const double w = gibbs_weight(spec, m, x.segment<3>(3 * k));
    e += w * (part(k) - mass * spec.mu) + 1.5 * spec.T * std::log(w);
  }
  return e;
}

std::mt19937_64 make_rng(std::uint64_t seed, int probe, int surface) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(probe), static_cast<std::uint32_t>(surface)};
  return std::mt19937_64(seq);
}

void wrap(Vec3& y, const Container& box) {
  for (int c = 0; c < 3; ++c) {
    const double len = box.hi(c) - box.lo(c);
    y(c) = box.lo(c) + (y(c) - box.lo(c)) - len * std::floor((y(c) - box.lo(c)) / len);
    if (y(c) >= box.hi(c)) y(c) = box.lo(c);
  }
}

double max_step(const Container& box, double temperature) {
  if (box.kind == Container::Kind::PeriodicBox) return (box.hi - box.lo).maxCoeff();
  return 10.0 * std::sqrt(temperature / box.kappa);
}

void validate_box(const Container& box) {
  if (box.kind == Container::Kind::PeriodicBox) {
    if (!((box.hi - box.lo).minCoeff() > 0.0)) throw InvalidParameterError("box must have positive extent");
  } else if (!(box.kappa > 0.0)) {
    throw InvalidParameterError("harmonic container needs kappa > 0");
  }
}

}  // namespace

ChainResult run_chain(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family, int j,
                      const Container& box, int n_particles, const SamplerOptions& options) {
  validate_spec(spec, m);
  validate_box(box);
  if (j < 0 || j >= family.count) throw InvalidParameterError("surface index out of range");
  if (n_particles < 0 || options.n_samples < 0 || options.thin < 1)
    throw InvalidParameterError("invalid sampler sizes");
  if (!(options.particle_mass > 0.0)) throw InvalidParameterError("particle mass must be positive");
  const bool gc = options.grand_canonical;
  if (gc && (spec.mode != GibbsMode::Uniform || box.kind != Container::Kind::PeriodicBox))
    throw InvalidParameterError("grand-canonical moves need uniform mode in a periodic box");
  if (!gc && n_particles == 0) throw InvalidParameterError("canonical chain needs particles");

  const double mass = options.particle_mass, temp = spec.T;
  SurfaceCache cache(family);
  std::mt19937_64 rng = make_rng(options.seed, options.probe_index, j);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vec x(3 * n_particles);
  for (int n = 0; n < n_particles; ++n)
    for (int c = 0; c < 3; ++c)
      x(3 * n + c) = box.kind == Container::Kind::PeriodicBox
                         ? box.lo(c) + (box.hi(c) - box.lo(c)) * unif(rng)
                         : box.center(c) + std::sqrt(temp / box.kappa) * gauss(rng);
  auto energy_of = [&](const Vec& y) {
    return position_energy(spec, m, cache.get(static_cast<int>(y.size() / 3), j), box, y, mass);
  };
  double u = energy_of(x);
  double step = std::min(options.initial_step, max_step(box, temp));
  const double log_ideal = 1.5 * std::log(2.0 * std::numbers::pi * mass * temp);

  long proposed = 0, accepted = 0;
  auto displacement = [&] {
    const int n = static_cast<int>(x.size() / 3);
    const int k = std::uniform_int_distribution<int>(0, n - 1)(rng);
    Vec y = x;
    Vec3 r = y.segment<3>(3 * k);
    for (int c = 0; c < 3; ++c) r(c) += step * (2.0 * unif(rng) - 1.0);
    if (box.kind == Container::Kind::PeriodicBox) wrap(r, box);
    y.segment<3>(3 * k) = r;
    const double uy = energy_of(y);
    ++proposed;
    if (unif(rng) < metropolis_probability(uy - u, temp)) {
      x = std::move(y);
      u = uy;
      ++accepted;
    }
  };
  auto exchange = [&] {
    const int n = static_cast<int>(x.size() / 3);
    const double log_v = std::log(box.volume());
    if (unif(rng) < 0.5) {
      Vec y(x.size() + 3);
      y.head(x.size()) = x;
      for (int c = 0; c < 3; ++c) y(x.size() + c) = box.lo(c) + (box.hi(c) - box.lo(c)) * unif(rng);
      const double uy = energy_of(y);
      const double log_acc = log_v + log_ideal - std::log(n + 1.0) - (uy - u) / temp;
      if (std::log(unif(rng)) < log_acc) {
        x = std::move(y);
        u = uy;
      }
    } else if (n > 0) {
      const int k = std::uniform_int_distribution<int>(0, n - 1)(rng);
      Vec y(x.size() - 3);
      y.head(3 * k) = x.head(3 * k);
      y.tail(y.size() - 3 * k) = x.tail(x.size() - 3 * k - 3);
      const double uy = energy_of(y);
      const double log_acc = std::log(static_cast<double>(n)) - log_v - log_ideal - (uy - u) / temp;
      if (std::log(unif(rng)) < log_acc) {
        x = std::move(y);
        u = uy;
      }
    }
  };
  auto move = [&] {
    if (gc && unif(rng) < 0.5)
      exchange();
    else if (x.size() > 0)
      displacement();
  };

  const long burn = options.burn_in >= 0 ? options.burn_in : 10L * std::max(n_particles, 1) * 1000L;
  long window_prop = 0, window_acc = 0;
  const double cap = max_step(box, temp);
  for (long b = 0; b < burn; ++b) {
    const long before_p = proposed, before_a = accepted;
    move();
    window_prop += proposed - before_p;
    window_acc += accepted - before_a;
    if (window_prop >= 100) {
      const double rate = static_cast<double>(window_acc) / window_prop;
      if (rate > 0.5) step = std::min(step * 1.2, cap);
      if (rate < 0.2) step /= 1.2;
      window_prop = window_acc = 0;
    }
  }
  proposed = accepted = 0;

  // Sweep length is frozen here so that sampling times do not depend on the state.
  const int sweep = std::max(static_cast<int>(x.size() / 3), std::max(n_particles, 1));
  ChainResult out;
  out.states.reserve(options.n_samples);
  for (int s = 0; s < options.n_samples; ++s) {
    for (int t = 0; t < options.thin * sweep; ++t) move();
    const int n = static_cast<int>(x.size() / 3);
    PhaseState st;
    st.x = x;
    st.p.resize(3 * n);
    st.masses = Vec::Constant(n, mass);
    st.surface = j;
    for (int k = 0; k < n; ++k) {
      const double w = gibbs_weight(spec, m, x.segment<3>(3 * k));
      const double sd = std::sqrt(mass * temp / w);
      for (int c = 0; c < 3; ++c) st.p(3 * k + c) = mass * spec.u0(c) + sd * gauss(rng);
    }
    out.states.push_back(std::move(st));
  }
  out.step = step;
  out.acceptance = proposed > 0 ? static_cast<double>(accepted) / proposed : 1.0;
  if (proposed > 0 && (out.acceptance < 0.05 || out.acceptance > 0.8))
    out.warnings.push_back("surface " + std::to_string(j) + ": acceptance " + num(out.acceptance) +
                           " outside [0.05, 0.8] after tuning");
  return out;
}

SampleSet sample(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family, const Container& box,
                 int n_particles, const SurfaceWeights& weights, const SamplerOptions& options) {
  if (weights.q.size() != family.count) throw InvalidParameterError("one weight per surface is required");
  std::mt19937_64 rng = make_rng(options.seed, options.probe_index, family.count);
  std::vector<int> counts(family.count, 0);
  std::discrete_distribution<int> pick(weights.q.data(), weights.q.data() + weights.q.size());
  for (int s = 0; s < options.n_samples; ++s) ++counts[pick(rng)];
  std::vector<ChainResult> chains(family.count);
  parallel_for(family.count, options.workers, [&](int j) {
    if (counts[j] == 0) return;
    SamplerOptions o = options;
    o.n_samples = counts[j];
    chains[j] = run_chain(spec, m, family, j, box, n_particles, o);
  });
  SampleSet out;
  out.counts = counts;
  for (int j = 0; j < family.count; ++j) {
    out.acceptance.push_back(chains[j].acceptance);
    for (auto& s : chains[j].states) out.states.push_back(std::move(s));
    for (auto& w : chains[j].warnings) out.warnings.push_back(std::move(w));
  }
  return out;
}

namespace {

struct Reweighted {
  std::vector<std::vector<double>> log_w;  // [sample][surface], relative to surface 0
  std::vector<std::vector<ProbeObservables>> obs;
  ChainResult chain;
};

ProbeObservables observe(const PhaseState& s, const Vec& partition, const Mollifier& m, const Vec3& y) {
  ProbeObservables o;
  for (int n = 0; n < s.masses.size(); ++n) {
    const double eta = m.eval(y - s.x.segment<3>(3 * n));
    if (eta == 0.0) continue;
    const Vec3 p = s.p.segment<3>(3 * n);
    o.rho += s.masses(n) * eta;
    o.rho_u += eta * p;
    o.energy += eta * (p.squaredNorm() / (2.0 * s.masses(n)) + partition(n));
  }
  return o;
}

Reweighted reweight(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family, const Container& box,
                    int n_particles, const SamplerOptions& options, bool with_obs) {
  Reweighted r;
  r.chain = run_chain(spec, m, family, 0, box, n_particles, options);
  SurfaceCache cache(family);
  const int ns = static_cast<int>(r.chain.states.size());
  r.log_w.assign(ns, std::vector<double>(family.count, 0.0));
  if (with_obs) r.obs.assign(ns, std::vector<ProbeObservables>(family.count));
  for (int s = 0; s < ns; ++s) {
    const PhaseState& st = r.chain.states[s];
    const int n = static_cast<int>(st.masses.size());
    double u0 = 0.0;
    for (int j = 0; j < family.count; ++j) {
      const Surface& surf = cache.get(n, j);
      const double uj = position_energy(spec, m, surf, box, st.x, options.particle_mass);
      if (j == 0) u0 = uj;
      r.log_w[s][j] = -(uj - u0) / spec.T;
      if (with_obs) r.obs[s][j] = observe(st, n > 0 ? surf.partition(st.x) : Vec(), m, spec.probe);
    }
  }
  return r;
}

// q_j from a block of samples; log weights are shifted by a common constant.
Vec block_q(const std::vector<std::vector<double>>& log_w, int begin, int end, double shift) {
  const int d = static_cast<int>(log_w.front().size());
  Vec z = Vec::Zero(d);
  for (int s = begin; s < end; ++s)
    for (int j = 0; j < d; ++j) z(j) += std::exp(log_w[s][j] - shift);
  return z / z.sum();
}

double max_log_weight(const std::vector<std::vector<double>>& log_w) {
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& row : log_w)
    for (double v : row) mx = std::max(mx, v);
  return mx;
}

double min_ess(const std::vector<std::vector<double>>& log_w, double shift) {
  const int d = static_cast<int>(log_w.front().size());
  double best = std::numeric_limits<double>::infinity();
  for (int j = 1; j < d; ++j) {
    double s1 = 0.0, s2 = 0.0;
    for (const auto& row : log_w) {
      const double w = std::exp(row[j] - shift);
      s1 += w;
      s2 += w * w;
    }
    best = std::min(best, s2 > 0.0 ? s1 * s1 / s2 : 0.0);
  }
  return best;
}

int batch_count(int samples, int wanted) { return std::max(2, std::min(wanted, samples / 2)); }

// Tensor product rule over the container for dimension 3N.
struct TensorRule {
  std::vector<double> nodes[3];
  std::vector<double> weights[3];
  bool gaussian = false;
};

TensorRule container_rule(const Container& box, double temperature, int points) {
  TensorRule r;
  if (box.kind == Container::Kind::PeriodicBox) {
    const auto gl = quadrature::gauss_legendre(points);
    for (int c = 0; c < 3; ++c) {
      const double half = 0.5 * (box.hi(c) - box.lo(c)), mid = 0.5 * (box.hi(c) + box.lo(c));
      for (int i = 0; i < points; ++i) {
        r.nodes[c].push_back(mid + half * gl.nodes[i]);
        r.weights[c].push_back(half * gl.weights[i]);
      }
    }
  } else {
    r.gaussian = true;
    const auto gh = quadrature::gauss_hermite(points);
    const double scale = std::sqrt(2.0 * temperature / box.kappa);
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < points; ++i) {
        r.nodes[c].push_back(box.center(c) + scale * gh.nodes[i]);
        r.weights[c].push_back(scale * gh.weights[i]);
      }
  }
  return r;
}

Vec direct_q(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family, const Container& box,
             int n_particles, double mass, int points) {
  const TensorRule rule = container_rule(box, spec.T, points);
  const int dims = 3 * n_particles;
  long total = 1;
  for (int k = 0; k < dims; ++k) total *= points;
  SurfaceCache cache(family);
  std::vector<std::vector<double>> log_terms(family.count);
  Vec x(dims);
  std::vector<int> idx(dims, 0);
  for (long t = 0; t < total; ++t) {
    long rem = t;
    double log_w = 0.0;
    for (int k = 0; k < dims; ++k) {
      idx[k] = static_cast<int>(rem % points);
      rem /= points;
      x(k) = rule.nodes[k % 3][idx[k]];
      log_w += std::log(rule.weights[k % 3][idx[k]]);
    }
    const double trap = rule.gaussian ? box.energy(x) : 0.0;
    for (int j = 0; j < family.count; ++j) {
      const double u = position_energy(spec, m, cache.get(n_particles, j), box, x, mass) - trap;
      log_terms[j].push_back(log_w - u / spec.T);
    }
  }
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& v : log_terms)
    for (double a : v) shift = std::max(shift, a);
  Vec z(family.count);
  for (int j = 0; j < family.count; ++j) {
    double s = 0.0;
    for (double a : log_terms[j]) s += std::exp(a - shift);
    z(j) = s;
  }
  return z / z.sum();
}

}  // namespace

SurfaceWeights surface_weights(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family,
                               const Container& box, int n_particles, WeightMethod method,
                               const SamplerOptions& options, const WeightOptions& wopt) {
  validate_spec(spec, m);
  validate_box(box);
  SurfaceWeights out;
  if (family.count == 1) {
    out.q = Vec::Ones(1);
    out.stderr_ = Vec::Zero(1);
    out.min_effective_samples = options.n_samples;
    return out;
  }
  if (method == WeightMethod::DirectQuadrature) {
    if (n_particles < 1 || n_particles > 2) throw InvalidParameterError("direct quadrature supports N = 1 or 2");
    out.q = direct_q(spec, m, family, box, n_particles, options.particle_mass, wopt.quadrature_points);
    const Vec coarse =
        direct_q(spec, m, family, box, n_particles, options.particle_mass, std::max(2, wopt.quadrature_points / 2));
    out.stderr_ = (out.q - coarse).cwiseAbs();
    out.min_effective_samples = std::numeric_limits<double>::infinity();
    return out;
  }
  SamplerOptions o = options;
  o.grand_canonical = false;
  const Reweighted r = reweight(spec, m, family, box, n_particles, o, false);
  const int ns = static_cast<int>(r.log_w.size());
  if (ns < 2) throw InsufficientOverlapError("reweighting needs samples");
  const double shift = max_log_weight(r.log_w);
  out.min_effective_samples = min_ess(r.log_w, shift);
  if (out.min_effective_samples < wopt.min_effective_samples)
    throw InsufficientOverlapError("effective sample size " + num(out.min_effective_samples) + " below " +
                                   num(wopt.min_effective_samples));
  out.q = block_q(r.log_w, 0, ns, shift);
  const int nb = batch_count(ns, wopt.batches);
  Vec sum = Vec::Zero(family.count), sum2 = Vec::Zero(family.count);
  for (int b = 0; b < nb; ++b) {
    const Vec qb = block_q(r.log_w, b * ns / nb, (b + 1) * ns / nb, shift);
    sum += qb;
    sum2 += qb.cwiseAbs2();
  }
  const Vec mean = sum / nb;
  out.stderr_ = ((sum2 / nb - mean.cwiseAbs2()).cwiseMax(0.0) / (nb - 1)).cwiseSqrt();
  return out;
}

MatchResult estimate_observables(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family,
                                 const Container& box, int n_particles, const SamplerOptions& options) {
  const Reweighted r = reweight(spec, m, family, box, n_particles, options, true);
  const int ns = static_cast<int>(r.log_w.size());
  if (ns < 2) throw InvalidParameterError("estimates need at least two samples");
  const double shift = max_log_weight(r.log_w);
  MatchResult out;
  out.spec = spec;
  out.warnings = r.chain.warnings;
  out.weights.min_effective_samples = family.count > 1 ? min_ess(r.log_w, shift) : ns;
  if (out.weights.min_effective_samples < 100.0)
    throw InsufficientOverlapError("effective sample size below 100 in surface reweighting");
  out.weights.q = block_q(r.log_w, 0, ns, shift);

  auto block = [&](int begin, int end) {
    Eigen::Matrix<double, 5, 1> acc = Eigen::Matrix<double, 5, 1>::Zero();
    double z = 0.0;
    for (int s = begin; s < end; ++s)
      for (int j = 0; j < family.count; ++j) {
        const double w = std::exp(r.log_w[s][j] - shift);
        const auto& o = r.obs[s][j];
        acc(0) += w * o.rho;
        acc.segment<3>(1) += w * o.rho_u;
        acc(4) += w * o.energy;
        z += w;
      }
    return Eigen::Matrix<double, 5, 1>(acc / z);
  };
  const auto all = block(0, ns);
  const int nb = batch_count(ns, 20);
  Eigen::Matrix<double, 5, 1> s1 = Eigen::Matrix<double, 5, 1>::Zero(), s2 = s1;
  Vec qs1 = Vec::Zero(family.count), qs2 = qs1;
  for (int b = 0; b < nb; ++b) {
    const auto v = block(b * ns / nb, (b + 1) * ns / nb);
    s1 += v;
    s2 += v.cwiseAbs2();
    const Vec qb = block_q(r.log_w, b * ns / nb, (b + 1) * ns / nb, shift);
    qs1 += qb;
    qs2 += qb.cwiseAbs2();
  }
  const Eigen::Matrix<double, 5, 1> mean = s1 / nb;
  const Eigen::Matrix<double, 5, 1> se = ((s2 / nb - mean.cwiseAbs2()).cwiseMax(0.0) / (nb - 1)).cwiseSqrt();
  const Vec qmean = qs1 / nb;
  out.weights.stderr_ = ((qs2 / nb - qmean.cwiseAbs2()).cwiseMax(0.0) / (nb - 1)).cwiseSqrt();
  out.achieved = {all(0), all.segment<3>(1), all(4)};
  out.stderr_ = {se(0), se.segment<3>(1), se(4)};
  out.evaluations = 1;
  return out;
}

MatchResult match_thermo(const ThermoTargets& targets, const GibbsSpec& template_spec, const Mollifier& m,
                         const SurfaceFamily& family, const Container& box, int n_particles,
                         const SamplerOptions& options, const MatchOptions& mopt) {
  if (!(targets.rho > 0.0) || !std::isfinite(targets.energy) || targets.energy == 0.0)
    throw InvalidParameterError("targets need rho > 0 and a nonzero finite energy");
  if (box.kind == Container::Kind::PeriodicBox) {
    const Vec3 y = targets.probe;
    if (((y - box.lo).minCoeff() < m.epsilon()) || ((box.hi - y).minCoeff() < m.epsilon()))
      throw InvalidParameterError("probe support must lie inside the periodic box");
  }
  GibbsSpec spec = template_spec;
  spec.probe = targets.probe;
  spec.u0 = targets.rho_u / targets.rho;
  int evaluations = 0;
  MatchResult last;

  auto evaluate = [&](double mu, double temp) {
    GibbsSpec s = spec;
    s.mu = mu;
    s.T = temp;
    last = estimate_observables(s, m, family, box, n_particles, options);
    ++evaluations;
    return last;
  };
  auto rho_residual = [&](const MatchResult& r) {
    return r.achieved.rho > 0.0 ? std::log(r.achieved.rho / targets.rho) : -10.0;
  };
  auto energy_residual = [&](const MatchResult& r) {
    return (r.achieved.energy - targets.energy) / std::abs(targets.energy);
  };
  // Residuals below twice the sampling error are treated as converged.
  auto energy_done = [&](const MatchResult& r, double g) {
    return std::abs(g) <= std::max(mopt.inner_tolerance, 2.0 * r.stderr_.energy / std::abs(targets.energy));
  };
  auto rho_done = [&](const MatchResult& r, double f) {
    return std::abs(f) <= std::max(mopt.inner_tolerance, 2.0 * r.stderr_.rho / targets.rho);
  };

  const double t_lo = std::log(1e-3), t_hi = std::log(1e3);
  double log_t = std::log(std::clamp(spec.T, 1e-3, 1e3));

  // Inner secant on log T at fixed mu; returns the final estimate.
  auto solve_t = [&](double mu) {
    double s0 = log_t, s1 = std::clamp(log_t + 0.1, t_lo, t_hi);
    if (s1 == s0) s1 = s0 - 0.1;
    MatchResult r0 = evaluate(mu, std::exp(s0));
    double g0 = energy_residual(r0);
    if (energy_done(r0, g0)) return r0;
    MatchResult r1 = evaluate(mu, std::exp(s1));
    double g1 = energy_residual(r1);
    int pinned = 0;
    for (int it = 0; it < mopt.max_inner && !energy_done(r1, g1); ++it) {
      if (g1 == g0) break;
      double s2 = s1 - g1 * (s1 - s0) / (g1 - g0);
      s2 = std::clamp(s2, s1 - 1.0, s1 + 1.0);
      if (s2 <= t_lo || s2 >= t_hi) {
        s2 = std::clamp(s2, t_lo, t_hi);
        if (++pinned > 2) break;
      }
      s0 = s1;
      g0 = g1;
      s1 = s2;
      r1 = evaluate(mu, std::exp(s1));
      g1 = energy_residual(r1);
    }
    log_t = s1;
    return r1;
  };

  double mu0 = spec.mu;
  MatchResult r0 = solve_t(mu0);
  double f0 = rho_residual(r0);
  MatchResult best = r0;
  if (!rho_done(r0, f0)) {
    double mu1 = mu0 + 0.5 * std::exp(log_t);
    MatchResult r1 = solve_t(mu1);
    double f1 = rho_residual(r1);
    int pinned = 0;
    for (int it = 0; it < mopt.max_outer && !rho_done(r1, f1); ++it) {
      if (f1 == f0) break;
      const double temp = std::exp(log_t);
      double mu2 = mu1 - f1 * (mu1 - mu0) / (f1 - f0);
      mu2 = std::clamp(mu2, mu1 - 5.0 * temp, mu1 + 5.0 * temp);
      if (mu2 <= -50.0 * temp || mu2 >= 50.0 * temp) {
        mu2 = std::clamp(mu2, -50.0 * temp, 50.0 * temp);
        if (++pinned > 2) break;
      }
      mu0 = mu1;
      f0 = f1;
      mu1 = mu2;
      r1 = solve_t(mu1);
      f1 = rho_residual(r1);
    }
    best = r1;
  }
  const double rho_rel = std::abs(best.achieved.rho - targets.rho) / targets.rho;
  const double e_rel = std::abs(energy_residual(best));
  if (!(rho_rel <= mopt.tolerance) || !(e_rel <= mopt.tolerance))
    throw UnattainableTargetError("thermodynamic matching failed: rho residual " + num(rho_rel) +
                                  ", energy residual " + num(e_rel));
  best.evaluations = evaluations;
  return best;
}

}  // namespace qcons
