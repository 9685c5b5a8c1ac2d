#pragma once

#include "qcons/dynamics.hpp"
#include "qcons/mollifier.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace qcons {

enum class GibbsMode { Uniform, LocalMollified };

struct GibbsSpec {
  double T = 1.0;
  double mu = 0.0;
  Vec3 u0 = Vec3::Zero();
  Vec3 probe = Vec3::Zero();
  double eta_floor = 0.0;  ///< 0 selects eta(0) * 1e-3
  GibbsMode mode = GibbsMode::Uniform;
};

/// Confinement for sampling: a periodic box or a harmonic trap around a center.
struct Container {
  enum class Kind { PeriodicBox, Harmonic };
  Kind kind = Kind::PeriodicBox;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  double kappa = 1.0;
  Vec3 center = Vec3::Zero();

  double volume() const;
  /// Trap energy sum_n kappa/2 |x^n - c|^2 (zero for boxes).
  double energy(const Vec& x) const;
};

/// Surfaces j = 0..count-1 for any particle number (grand-canonical moves change N).
struct SurfaceFamily {
  int count = 1;
  std::function<SurfacePtr(int n_particles, int j)> make;
};

SurfaceFamily constant_family(std::vector<SurfacePtr> surfaces);

/// Throws InvalidParameterError for T <= 0 or an eta floor outside (0, eta(0)].
void validate_spec(const GibbsSpec& spec, const Mollifier& m);

/// Resolved per-particle weight: 1 in uniform mode, max(eta(y - x^n), floor) otherwise.
double gibbs_weight(const GibbsSpec& spec, const Mollifier& m, const Vec3& xn);

/// sum_n w_n (|p^n - M_n u0|^2 / 2M_n + lambda^n - M_n mu).
double gibbs_energy(const PhaseState& s, const GibbsSpec& spec, const Vec& partition, const Mollifier& m);

/// Lagrange multipliers (lambda_1, lambda_0) = (1/T, mu/T) of the entropy-minimizing density.
std::pair<double, double> lagrange_multipliers(const GibbsSpec& spec);

/// Metropolis acceptance probability min(1, exp(-dE / T)).
double metropolis_probability(double delta_energy, double temperature);

struct SamplerOptions {
  int n_samples = 1000;
  std::uint64_t seed = 1;
  int probe_index = 0;
  int thin = 1;            ///< sweeps between recorded samples
  long burn_in = -1;       ///< proposals; negative selects 10 * N * 1000
  double particle_mass = 1.0;
  bool grand_canonical = false;
  double initial_step = 0.5;
  int workers = 1;
};

/// Probe-space observables of one sample: rho, rho u and E at the probe.
struct ProbeObservables {
  double rho = 0.0;
  Vec3 rho_u = Vec3::Zero();
  double energy = 0.0;
};

struct ChainResult {
  std::vector<PhaseState> states;
  double acceptance = 0.0;
  double step = 0.0;
  std::vector<std::string> warnings;
};

/// One Markov chain on surface j: Metropolis random walk in x, exact Gaussian momenta.
ChainResult run_chain(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family, int j,
                      const Container& box, int n_particles, const SamplerOptions& options);

struct SurfaceWeights {
  Vec q;
  Vec stderr_;
  double min_effective_samples = 0.0;
};

struct SampleSet {
  std::vector<PhaseState> states;  ///< labelled by PhaseState::surface
  std::vector<int> counts;
  std::vector<double> acceptance;
  std::vector<std::string> warnings;
};

/// Draws surface labels from q, then per-surface chains (concurrently, seeded per surface).
SampleSet sample(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family, const Container& box,
                 int n_particles, const SurfaceWeights& weights, const SamplerOptions& options);

enum class WeightMethod { DirectQuadrature, Reweighting };

struct WeightOptions {
  int quadrature_points = 24;  ///< per dimension
  int batches = 20;
  double min_effective_samples = 100.0;
};

/// q_j = Z_j / sum_k Z_k. Direct quadrature needs N <= 2; reweighting uses a surface-0 chain
/// and throws InsufficientOverlapError when the effective sample size falls below the threshold.
SurfaceWeights surface_weights(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family,
                               const Container& box, int n_particles, WeightMethod method,
                               const SamplerOptions& options, const WeightOptions& wopt = {});

struct ThermoTargets {
  Vec3 probe = Vec3::Zero();
  double rho = 1.0;
  Vec3 rho_u = Vec3::Zero();
  double energy = 1.0;
};

struct MatchOptions {
  double tolerance = 0.02;     ///< relative residual accepted for rho and E
  double inner_tolerance = 0.005;
  int max_outer = 20;
  int max_inner = 20;
};

struct MatchResult {
  GibbsSpec spec;
  SurfaceWeights weights;
  ProbeObservables achieved;
  ProbeObservables stderr_;
  int evaluations = 0;
  std::vector<std::string> warnings;
};

/// Estimates probe observables from a surface-0 chain, reweighted to the q-weighted surface mixture.
MatchResult estimate_observables(const GibbsSpec& spec, const Mollifier& m, const SurfaceFamily& family,
                                 const Container& box, int n_particles, const SamplerOptions& options);

/// Nested secant search: outer on mu for rho, inner on T for E; u0 = rho_u / rho.
/// Throws UnattainableTargetError when mu leaves [-50T, 50T] or T leaves [1e-3, 1e3].
MatchResult match_thermo(const ThermoTargets& targets, const GibbsSpec& template_spec, const Mollifier& m,
                         const SurfaceFamily& family, const Container& box, int n_particles,
                         const SamplerOptions& options, const MatchOptions& mopt = {});

}  // namespace qcons
