#pragma once

#include "qcons/conservation.hpp"
#include "qcons/ensemble.hpp"
#include "qcons/quantum_oracle.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>

namespace qcons::config {

struct ModelConfig {
  enum class Type { Free, ScalarPair, TwoState };
  Type type = Type::Free;
  PairFunction pair = PairFunction::zero();
  TwoStateParams two_state;

  int dim() const { return type == Type::TwoState ? 2 : 1; }
  /// nullptr for free particles.
  PotentialPtr potential(int n_particles) const;
};

struct ParticlesConfig {
  int count = 1;
  Vec masses;  ///< one per particle
  std::optional<Vec> positions;
  std::optional<Vec> momenta;
  double spacing = 1.3;
  double jitter = 0.1;
  double temperature = 0.0;  ///< Maxwellian initial momenta when momenta are not given
  Container container;
};

struct DynamicsConfig {
  double dt = 1e-3;
  int steps = 0;
  int surface = 0;
  bool corrected = false;
  double mass_scale = 1e3;  ///< M of the corrected surfaces
  int record_every = 1;
};

struct ProbeConfig {
  bool explicit_box = false;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  std::array<int, 3> counts{3, 3, 3};
};

struct ConservationConfig {
  double dt_check = 1e-4;
  FieldMode mode = FieldMode::PerTrajectory;
  double tolerance = 1e-6;  ///< scaled max residual
  double stderr_factor = 5.0;
  int samples_per_surface = 256;
  bool richardson = true;
};

struct EnsembleConfig {
  GibbsSpec spec;
  SamplerOptions sampler;
  WeightMethod weight_method = WeightMethod::Reweighting;
  WeightOptions weight_options;
  std::optional<Vec> weights;
  std::optional<ThermoTargets> targets;
  MatchOptions match;
};

struct QuantumConfig {
  quantum::LineModel model;
  quantum::EgorovOptions egorov;
  bool expect_exact = false;
  int grid_points = 256;
  double lo = -3.141592653589793;
  double hi = 3.141592653589793;
  double mass = 100.0;
  quantum::LineFunction commutator_potential;
  quantum::Symbol symbol;
  quantum::CommutatorOptions commutator;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_directory = "qcons_out";
  ModelConfig model;
  ParticlesConfig particles;
  double epsilon = 1.0;
  DynamicsConfig dynamics;
  ProbeConfig probes;
  FieldMode field_mode = FieldMode::PerTrajectory;
  ConservationConfig conservation;
  std::optional<EnsembleConfig> ensemble;
  std::optional<QuantumConfig> quantum;
};

/// Parses and validates a configuration document; throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& text);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

}  // namespace qcons::config
