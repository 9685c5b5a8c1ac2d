#include "qcons/geometry.hpp"

#include "qcons/errors.hpp"
#include "qcons/format.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

namespace qcons::geometry {

Vec pair_distances(const Vec& x) {
  const int n_particles = particle_count(x);
  if (n_particles < 2) {
    throw InvalidParameterError("pair_distances needs at least two particles");
  }
  Vec r(pair_count(n_particles));
  int idx = 0;
  for (int n = 0; n < n_particles; ++n) {
    for (int k = n + 1; k < n_particles; ++k) {
      r[idx++] = (particle(x, n) - particle(x, k)).norm();
    }
  }
  return r;
}

Vec3 pair_direction_derivative(const Vec& x, int n, int k) {
  if (n == k) {
    throw CoincidentPointsError("pair_direction_derivative: n == k");
  }
  const Vec3 d = particle(x, n) - particle(x, k);
  const double r = d.norm();
  if (r == 0.0) {
    throw CoincidentPointsError("particles " + std::to_string(n) + " and " + std::to_string(k) +
                                " coincide");
  }
  return d / r;
}

Mat distance_jacobian(const Vec& x) {
  const int n_particles = particle_count(x);
  Mat jac = Mat::Zero(pair_count(n_particles), x.size());
  int idx = 0;
  for (int n = 0; n < n_particles; ++n) {
    for (int k = n + 1; k < n_particles; ++k) {
      const Vec3 e = pair_direction_derivative(x, n, k);
      jac.block<1, 3>(idx, 3 * n) = e.transpose();
      jac.block<1, 3>(idx, 3 * k) = -e.transpose();
      ++idx;
    }
  }
  return jac;
}

Vec lift_gradient_to_distances(const Vec& x, const Vec& g, double tolerance) {
  const Mat a = distance_jacobian(x).transpose();  // 3N x P
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? kLiftCutoff * s[0] : 0.0;
  Vec s_inv = Vec::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > cutoff) s_inv[i] = 1.0 / s[i];
  }
  Vec v = svd.matrixV() * (s_inv.asDiagonal() * (svd.matrixU().transpose() * g));
  const double residual = (a * v - g).norm();
  if (residual > tolerance * std::max(1.0, g.norm())) {
    throw ResidualTooLargeError("gradient lift residual " + num(residual) +
                                " exceeds tolerance; gradient not rigid-motion invariant?");
  }
  return v;
}

Vec reconstruct_positions(const Vec& r, int n_particles) {
  if (r.size() != pair_count(n_particles)) {
    throw InvalidParameterError("distance vector length does not match particle count");
  }
  Mat d2 = Mat::Zero(n_particles, n_particles);
  for (int n = 0; n < n_particles; ++n) {
    for (int k = n + 1; k < n_particles; ++k) {
      const double v = r[pair_index(n, k, n_particles)];
      d2(n, k) = d2(k, n) = v * v;
    }
  }
  const Mat centering =
      Mat::Identity(n_particles, n_particles) -
      Mat::Constant(n_particles, n_particles, 1.0 / n_particles);
  const Mat gram = -0.5 * centering * d2 * centering;
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  const Vec& lam = eig.eigenvalues();  // ascending
  const double tol = 1e-8 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  if (lam.minCoeff() < -tol) {
    throw NotRealizableError("Gram matrix has negative eigenvalue " + std::to_string(lam.minCoeff()));
  }
  if (n_particles > 3 && lam[n_particles - 4] > tol) {
    throw NotRealizableError("distances require more than three dimensions");
  }
  Vec x = Vec::Zero(3 * n_particles);
  const int rank = std::min(3, n_particles);
  for (int c = 0; c < rank; ++c) {
    const int col = n_particles - 1 - c;
    const double scale = std::sqrt(std::max(0.0, lam[col]));
    for (int n = 0; n < n_particles; ++n) {
      x[3 * n + c] = scale * eig.eigenvectors()(n, col);
    }
  }
  return x;
}

RigidAlignment align_rigid(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) {
    throw InvalidParameterError("align_rigid: particle counts differ");
  }
  const int n_particles = particle_count(x);
  Vec3 cx = Vec3::Zero();
  Vec3 cy = Vec3::Zero();
  for (int n = 0; n < n_particles; ++n) {
    cx += particle(x, n);
    cy += particle(y, n);
  }
  cx /= n_particles;
  cy /= n_particles;
  Mat3 h = Mat3::Zero();
  for (int n = 0; n < n_particles; ++n) {
    h += (particle(y, n) - cy) * (particle(x, n) - cx).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RigidAlignment out;
  // Full O(3): no determinant correction, reflections are admissible.
  out.rotation = svd.matrixV() * svd.matrixU().transpose();
  out.translation = cx - out.rotation * cy;
  double sq = 0.0;
  for (int n = 0; n < n_particles; ++n) {
    sq += (particle(x, n) - out.rotation * particle(y, n) - out.translation).squaredNorm();
  }
  out.rms_residual = std::sqrt(sq / n_particles);
  return out;
}

Vec apply_rigid(const Vec& x, const Mat3& q, const Vec3& alpha) {
  Vec out(x.size());
  for (int n = 0; n < particle_count(x); ++n) {
    out.segment<3>(3 * n) = q * particle(x, n) + alpha;
  }
  return out;
}

}  // namespace qcons::geometry
