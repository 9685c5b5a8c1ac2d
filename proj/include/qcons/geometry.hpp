#pragma once

#include "qcons/types.hpp"

namespace qcons::geometry {

/// Number of unordered pairs for N particles.
constexpr int pair_count(int n_particles) { return n_particles * (n_particles - 1) / 2; }

/// Index of pair (n, k), n < k, in the lexicographic order (0,1),(0,2),...,(N-2,N-1).
constexpr int pair_index(int n, int k, int n_particles) {
  return n * (2 * n_particles - n - 1) / 2 + (k - n - 1);
}

/// Pair distances |x^n - x^k| in lexicographic order. Requires N >= 2.
Vec pair_distances(const Vec& x);

/// (x^n - x^k)/|x^n - x^k|, the gradient of |x^n - x^k| with respect to x^n.
/// Throws CoincidentPointsError for n == k or coincident particles.
Vec3 pair_direction_derivative(const Vec& x, int n, int k);

/// P x 3N matrix of d r^{nk} / d x. Throws CoincidentPointsError if any r^{nk} = 0.
Mat distance_jacobian(const Vec& x);

/// Relative singular value cutoff used by lift_gradient_to_distances.
inline constexpr double kLiftCutoff = 1e-10;
inline constexpr double kLiftTolerance = 1e-10;

/// Minimal-norm v with (dr/dx)^T v = g, i.e. the pair-distance derivatives of a
/// rigid-motion invariant function whose Cartesian gradient is g.
/// Throws ResidualTooLargeError when the chain-rule residual exceeds tolerance * max(1, |g|).
Vec lift_gradient_to_distances(const Vec& x, const Vec& g, double tolerance = kLiftTolerance);

/// Classical multidimensional scaling: positions realizing the given pair distances.
/// Throws NotRealizableError for distance sets that do not embed in R^3.
Vec reconstruct_positions(const Vec& r, int n_particles);

struct RigidAlignment {
  Mat3 rotation;  ///< orthogonal, det = +1 or -1
  Vec3 translation;
  double rms_residual = 0.0;
};

/// Orthogonal Q and translation alpha minimizing sum_i |x^i - Q y^i - alpha|^2.
RigidAlignment align_rigid(const Vec& x, const Vec& y);

/// Applies x^i -> Q x^i + alpha to every particle.
Vec apply_rigid(const Vec& x, const Mat3& q, const Vec3& alpha);

}  // namespace qcons::geometry
