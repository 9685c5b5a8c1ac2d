#include "qcons/dynamics.hpp"

#include "qcons/errors.hpp"
#include "qcons/format.hpp"

#include <cmath>
#include <ostream>

namespace qcons {

Vec force(const Surface& surface, const Vec& x) { return -surface.gradient(x); }

double total_energy(const PhaseState& s, const Surface& surface) {
  double kin = 0.0;
  for (int n = 0; n < s.masses.size(); ++n) kin += s.p.segment<3>(3 * n).squaredNorm() / (2.0 * s.masses(n));
  return kin + surface.energy(s.x);
}

Vec unit_masses(int n_particles) { return Vec::Ones(n_particles); }

void validate_state(const PhaseState& s) {
  if (s.x.size() != s.p.size() || s.x.size() != 3 * s.masses.size())
    throw InvalidParameterError("phase state sizes are inconsistent");
  if (!s.x.allFinite() || !s.p.allFinite()) throw InvalidParameterError("phase state has non-finite entries");
  for (int n = 0; n < s.masses.size(); ++n)
    if (!(s.masses(n) > 0.0)) throw InvalidParameterError("masses must be positive");
}

namespace {

Vec inverse_mass_per_coord(const Vec& masses) {
  Vec w(3 * masses.size());
  for (int n = 0; n < masses.size(); ++n) w.segment<3>(3 * n).setConstant(1.0 / masses(n));
  return w;
}

void check_blow_up(const PhaseState& s) {
  if (!s.x.allFinite() || !s.p.allFinite() || s.x.cwiseAbs().maxCoeff() > kBlowUpThreshold ||
      s.p.cwiseAbs().maxCoeff() > kBlowUpThreshold)
    throw BlowUpError("trajectory blew up at time " + num(s.time));
}

}  // namespace

PhaseState verlet_step(const PhaseState& s, double dt, const Surface& surface, Vec* f) {
  const Vec inv_m = inverse_mass_per_coord(s.masses);
  Vec local;
  if (!f) {
    local = force(surface, s.x);
    f = &local;
  }
  PhaseState out = s;
  const Vec p_half = s.p + 0.5 * dt * *f;
  out.x = s.x + dt * inv_m.cwiseProduct(p_half);
  *f = force(surface, out.x);
  out.p = p_half + 0.5 * dt * *f;
  out.time = s.time + dt;
  check_blow_up(out);
  return out;
}

Trajectory integrate(const PhaseState& initial, double dt, int steps, const Surface& surface, int record_every) {
  validate_state(initial);
  if (!(dt > 0.0)) throw InvalidParameterError("dt must be positive");
  if (steps < 0 || record_every < 1) throw InvalidParameterError("invalid step counts");
  if (initial.surface != surface.index())
    throw InvalidParameterError("initial state surface does not match the surface provider");
  Trajectory traj;
  traj.dt = dt * record_every;
  PhaseState s = initial;
  Vec f = force(surface, s.x);
  traj.states.push_back(s);
  traj.energy.push_back(total_energy(s, surface));
  for (int k = 1; k <= steps; ++k) {
    s = verlet_step(s, dt, surface, &f);
    if (k % record_every == 0) {
      traj.states.push_back(s);
      traj.energy.push_back(total_energy(s, surface));
    }
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "# units: tau scaled time, x bohr, p atomic momentum, energy hartree\n";
  const int dof = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().x.size());
  out << "tau";
  for (int i = 1; i <= dof; ++i) out << ",x_" << i;
  for (int i = 1; i <= dof; ++i) out << ",p_" << i;
  out << ",energy\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    out << num(s.time);
    for (int i = 0; i < dof; ++i) out << ',' << num(s.x(i));
    for (int i = 0; i < dof; ++i) out << ',' << num(s.p(i));
    out << ',' << num(traj.energy[k]) << '\n';
  }
}

}  // namespace qcons
