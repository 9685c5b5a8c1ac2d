#pragma once

#include "qcons/fields.hpp"
#include "qcons/surface.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace qcons {

/// Phase-space ensemble at one time: group j evolves on surfaces[j] and carries weight weights[j].
struct DynamicEnsemble {
  std::vector<std::vector<PhaseState>> groups;
  std::vector<double> weights;
  std::vector<SurfacePtr> surfaces;
};

DynamicEnsemble single_trajectory(const PhaseState& s, SurfacePtr surface);

/// Every state advanced by one Verlet step of size dt (negative allowed).
DynamicEnsemble advance(const DynamicEnsemble& e, double dt);

Ensemble prepare_ensemble(const DynamicEnsemble& e);

struct ProbeResidual {
  Vec3 y = Vec3::Zero();
  bool masked = false;
  double mass = 0.0;
  Vec3 mom = Vec3::Zero();
  double energy = 0.0;
  double mass_se = 0.0;
  Vec3 mom_se = Vec3::Zero();
  double energy_se = 0.0;
  /// Largest magnitude among the time-derivative and divergence terms at this probe.
  double scale = 0.0;
};

struct ResidualNorm {
  double max = 0.0;
  double rms = 0.0;
};

struct ResidualReport {
  FieldMode mode = FieldMode::PerTrajectory;
  double time = 0.0;
  double dt_check = 0.0;
  std::vector<ProbeResidual> probes;
  int masked = 0;
  ResidualNorm mass, mom, energy;
  double field_scale = 0.0;
  /// log2 of max-norm ratios between dt_check and dt_check / 2 (NaN when both are at roundoff).
  double order_mass = 0.0, order_mom = 0.0, order_energy = 0.0;
  /// Order of the largest scaled residual.
  double richardson_order = 0.0;
};

struct ResidualOptions {
  bool richardson = true;
  int workers = 1;
};

/// Balance-law residuals d_tau(field) + div(flux) at each probe, with the time derivative taken by
/// central differences of Verlet-propagated ensembles at tau +- dt_check.
ResidualReport residuals(const DynamicEnsemble& e, const Mollifier& m, const std::vector<Vec3>& probes,
                         double dt_check, FieldMode mode, const ResidualOptions& options = {});

/// Scaled max residual over the three laws.
double scaled_max_residual(const ResidualReport& r);

nlohmann::json residual_report_json(const ResidualReport& r);
void write_residual_csv(std::ostream& out, const ResidualReport& r, const std::string& comment);

}  // namespace qcons
