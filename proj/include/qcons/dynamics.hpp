#pragma once

#include "qcons/surface.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qcons {

struct PhaseState {
  Vec x;
  Vec p;
  Vec masses;  ///< one per particle
  int surface = 0;
  double time = 0.0;
};

struct Trajectory {
  std::vector<PhaseState> states;
  std::vector<double> energy;
  double dt = 0.0;
};

/// Coordinate magnitude beyond which integration aborts.
inline constexpr double kBlowUpThreshold = 1e9;

/// -grad lambda_j(x).
Vec force(const Surface& surface, const Vec& x);

/// Kinetic plus surface energy.
double total_energy(const PhaseState& s, const Surface& surface);

/// Unit masses for N particles.
Vec unit_masses(int n_particles);

/// Throws InvalidParameterError for inconsistent sizes or nonpositive masses.
void validate_state(const PhaseState& s);

/// One velocity Verlet step of size dt (negative dt steps backwards). If f is given it
/// holds the force at s.x on entry and the force at the new position on exit.
PhaseState verlet_step(const PhaseState& s, double dt, const Surface& surface, Vec* f = nullptr);

/// Velocity Verlet trajectory with one force evaluation per step; records every
/// record_every-th state. Throws BlowUpError when a coordinate exceeds kBlowUpThreshold.
Trajectory integrate(const PhaseState& initial, double dt, int steps, const Surface& surface,
                     int record_every = 1);

/// CSV with columns tau, x_1..x_3N, p_1..p_3N, energy preceded by '#' comment lines.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::string& comment);

}  // namespace qcons
