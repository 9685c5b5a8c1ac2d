#pragma once

#include "qcons/dynamics.hpp"
#include "qcons/mollifier.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace qcons {

/// Per-state quantities that field estimators need, computed once per configuration.
struct StateData {
  Vec x;
  Vec p;
  Vec masses;
  Vec lambda;       ///< lambda^n, length N
  Mat power;        ///< power(n, m) = (p^m / M_m) . grad_{x^m} lambda^n
  Vec pair_deriv;   ///< lifted d lambda~ / d r^{nk}, lexicographic pairs
};

/// Evaluates the surface partition, its gradients and the pair-derivative lift at s.x.
StateData prepare_state(const PhaseState& s, const Surface& surface);

/// Field values with probe-space derivatives. Gradient index conventions:
/// grad_mom(k, j) = d_k mom_j, grad_sigma[k](l, j) = d_k sigma_lj, grad_q(k, l) = d_k q_l.
/// div_* are divergences of the mass, momentum and energy fluxes.
struct FieldValues {
  double rho = 0.0;
  Vec3 mom = Vec3::Zero();
  double energy = 0.0;
  Mat3 sigma = Mat3::Zero();
  Vec3 q = Vec3::Zero();
  Vec3 grad_rho = Vec3::Zero();
  Mat3 grad_mom = Mat3::Zero();
  Vec3 grad_energy = Vec3::Zero();
  std::array<Mat3, 3> grad_sigma{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  Mat3 grad_q = Mat3::Zero();
  double div_mass = 0.0;
  Vec3 div_mom = Vec3::Zero();
  double div_energy = 0.0;

  static constexpr int kPackedSize = 73;
  Vec pack() const;
  static FieldValues unpack(const Vec& v);
};

enum class FieldMode {
  PerTrajectory,  ///< pre-split fluxes, no velocity splitting
  Canonical,      ///< velocity u, stress sigma and heat flux q relative to u
};

/// Density below which a probe is vacuum.
inline constexpr double kRhoFloor = 1e-12;

struct DensityValues {
  double rho = 0.0;
  Vec3 mom = Vec3::Zero();
  double energy = 0.0;
};

DensityValues instantaneous_density(const StateData& s, const Mollifier& m, const Vec3& y);

/// Pre-split momentum flux: kinetic sum eta p p / M minus the bond term.
Mat3 instantaneous_momentum_flux(const StateData& s, const Mollifier& m, const Vec3& y);

/// Density, momentum and energy densities and their gradients only.
FieldValues density_fields(const StateData& s, const Mollifier& m, const Vec3& y);

/// Full single-state fields relative to the fixed bulk velocity u with gradient grad_u(k, j) = d_k u_j.
/// Averaging these over an ensemble gives the ensemble fields exactly.
FieldValues state_fields(const StateData& s, const Mollifier& m, const Vec3& y, const Vec3& u,
                         const Mat3& grad_u);

/// Surface-weighted ensemble: group j holds states on surface j with weight q_j.
struct Ensemble {
  std::vector<std::vector<StateData>> groups;
  std::vector<double> weights;
};

/// Single-state ensemble.
Ensemble single_state(StateData s);

/// Weighted mean and standard error of per-state packed vectors.
struct WeightedStats {
  Vec mean;
  Vec stderr_;
};
WeightedStats weighted_stats(const std::vector<std::vector<Vec>>& values, const std::vector<double>& weights);

struct VelocityField {
  Vec3 u = Vec3::Zero();
  Mat3 grad_u = Mat3::Zero();  ///< grad_u(k, j) = d_k u_j
  double rho = 0.0;
};

/// u = <sum eta p> / <sum M eta> with its probe gradient. Throws VacuumProbeError below kRhoFloor.
VelocityField velocity_field(const Ensemble& e, const Mollifier& m, const Vec3& y);

struct FieldSample {
  Vec3 y = Vec3::Zero();
  bool vacuum = false;
  Vec3 u = Vec3::Zero();
  Mat3 grad_u = Mat3::Zero();
  FieldValues mean;
  FieldValues stderr_;
};

/// Per-state fields at one probe for the given mode (u from the ensemble in canonical mode).
/// Vacuum probes in canonical mode yield sample.vacuum and empty per-state lists.
std::vector<std::vector<FieldValues>> per_state_fields(const Ensemble& e, const Mollifier& m, const Vec3& y,
                                                       FieldMode mode, FieldSample* sample = nullptr);

FieldSample field_sample(const Ensemble& e, const Mollifier& m, const Vec3& y, FieldMode mode);

Mat3 stress_tensor(const Ensemble& e, const Mollifier& m, const Vec3& y);
Vec3 heat_flux(const Ensemble& e, const Mollifier& m, const Vec3& y);

struct ProbeGrid {
  std::vector<FieldSample> samples;
  FieldMode mode = FieldMode::PerTrajectory;
  double time = 0.0;
  std::vector<double> weights;
};

/// Probes on the lattice lo + (hi - lo) * i / (count - 1) per axis (count 1 puts the probe at lo).
std::vector<Vec3> probe_lattice(const Vec3& lo, const Vec3& hi, const std::array<int, 3>& counts);

ProbeGrid field_grid(const Ensemble& e, const Mollifier& m, const std::vector<Vec3>& probes, FieldMode mode,
                     double time = 0.0, int workers = 1);

/// CSV: y_1..y_3, vacuum, rho, mom_1..3, E, sigma_11..33, q_1..3, and *_se columns in canonical mode.
void write_probe_grid_csv(std::ostream& out, const ProbeGrid& grid, const std::string& comment);

}  // namespace qcons
