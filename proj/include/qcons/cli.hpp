#pragma once

#include "qcons/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace qcons::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigFailure = 2, kPhysicsFailure = 3 };

/// Surface j of the configured model for n particles (corrected surfaces when dynamics.corrected is set).
SurfacePtr make_surface(const config::RunConfig& cfg, int n_particles, int j);
SurfaceFamily make_family(const config::RunConfig& cfg);

/// Configured positions and momenta, or a jittered cubic lattice with Maxwellian momenta drawn from the seed.
PhaseState initial_state(const config::RunConfig& cfg);

/// Configured probe lattice, or the bounding box of x with the configured counts.
std::vector<Vec3> probe_points(const config::RunConfig& cfg, const Vec& x);

/// Gibbs-sampled ensemble with samples_per_surface states on every surface of positive weight.
DynamicEnsemble sampled_ensemble(const config::RunConfig& cfg, int workers, nlohmann::json* info = nullptr);

/// Output directory: QCONS_OUTPUT_DIR when set, the configured directory otherwise.
std::filesystem::path output_directory(const config::RunConfig& cfg);

/// Runs one subcommand on the configuration text and returns the exit code.
int run_command(const std::string& command, const std::string& config_text, int workers, std::ostream& log);

/// Command-line entry point.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qcons::cli
