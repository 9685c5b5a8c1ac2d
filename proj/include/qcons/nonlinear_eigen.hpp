#pragma once

#include "qcons/potential.hpp"

#include <vector>

namespace qcons {

/// Solution of (V + (1/4M) Psi G Psi^*) Psi = Psi Lambda_bar with G = sum_i (d_i Psi)^* (d_i Psi).
struct CorrectedSurfaces {
  Vec lambdas_bar;
  CMat psi_bar;
  Mat per_particle_bar;  ///< N x d
  double mass = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  std::vector<CMat> dpsi;  ///< d Psi_bar / d x_i, i in [0, 3N)
};

struct NonlinearEigenOptions {
  enum class Mode { FixedPoint, Continuation };
  Mode mode = Mode::FixedPoint;
  int max_iter = 50;
  double tolerance = 1e-12;
  double mass_min = 10.0;
  int continuation_steps = 8;
};

/// Throws InvalidParameterError for M below the guard, NoConvergenceError when the
/// fixed point stalls, DegenerateSpectrumError on near-degenerate spectra.
CorrectedSurfaces solve_nonlinear_eigen(const MatrixPotential& v, const Vec& x, double mass,
                                        const NonlinearEigenOptions& options = {});

/// Per-particle corrected eigenvalues (N x d) from the coordinate derivatives stored in cs.
Mat corrected_partition(const CorrectedSurfaces& cs, const MatrixPotential& v, const Vec& x);

/// Same, with externally supplied eigenvector derivatives (one d x d matrix per coordinate).
Mat corrected_partition(const CorrectedSurfaces& cs, const MatrixPotential& v, const Vec& x,
                        const std::vector<CMat>& dpsi);

}  // namespace qcons
