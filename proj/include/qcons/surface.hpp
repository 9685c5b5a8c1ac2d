#pragma once

#include "qcons/geometry.hpp"
#include "qcons/nonlinear_eigen.hpp"
#include "qcons/potential.hpp"

namespace qcons {

/// A scalar energy surface lambda_j(x) with its per-particle partition lambda_j^n(x).
/// Implementations are immutable and concurrently callable.
inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kFiniteDifferenceTolerance = 1e-6;

class Surface {
public:
  virtual ~Surface() = default;

  virtual int particles() const = 0;
  /// Index j of the adiabatic surface this provider represents.
  virtual int index() const { return 0; }
  virtual double energy(const Vec& x) const = 0;
  /// Defaults to central finite differences with h = 1e-5.
  virtual Vec gradient(const Vec& x) const;
  /// lambda_j^n for every particle, summing to energy(x).
  virtual Vec partition(const Vec& x) const = 0;
  /// Row n is the gradient of lambda_j^n; N x 3N. Defaults to finite differences.
  virtual Mat partition_gradient(const Vec& x) const;
  /// Relative accuracy of gradient(), used when lifting it to pair distances.
  virtual double gradient_tolerance() const { return kFiniteDifferenceTolerance; }
};

using SurfacePtr = std::shared_ptr<const Surface>;


Vec finite_difference_gradient(const Surface& s, const Vec& x, double h = kFiniteDifferenceStep);
Mat finite_difference_partition_gradient(const Surface& s, const Vec& x, double h = kFiniteDifferenceStep);

/// lambda = 0.
class FreeSurface : public Surface {
public:
  explicit FreeSurface(int n_particles);
  int particles() const override { return n_; }
  double energy(const Vec&) const override { return 0.0; }
  Vec gradient(const Vec& x) const override { return Vec::Zero(x.size()); }
  Vec partition(const Vec&) const override { return Vec::Zero(n_); }
  Mat partition_gradient(const Vec& x) const override { return Mat::Zero(n_, x.size()); }

private:
  int n_;
};

/// Independent particles in a harmonic well: offset * N + sum_n kappa/2 |x^n - c|^2.
class HarmonicWellSurface : public Surface {
public:
  HarmonicWellSurface(int n_particles, double kappa, const Vec3& center, double offset, int index = 0);
  int particles() const override { return n_; }
  int index() const override { return index_; }
  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Vec partition(const Vec& x) const override;
  Mat partition_gradient(const Vec& x) const override;
  double gradient_tolerance() const override { return geometry::kLiftTolerance; }

private:
  int n_;
  double kappa_;
  Vec3 center_;
  double offset_;
  int index_;
};

/// Eigenvalue lambda_j of V(x) with Hellmann-Feynman gradients.
class AdiabaticSurface : public Surface {
public:
  AdiabaticSurface(PotentialPtr v, int j);
  int particles() const override { return v_->particles(); }
  int index() const override { return j_; }
  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Vec partition(const Vec& x) const override;
  Mat partition_gradient(const Vec& x) const override;
  double gradient_tolerance() const override { return geometry::kLiftTolerance; }

private:
  PotentialPtr v_;
  int j_;
};

/// Corrected eigenvalue lambda_bar_j of the nonlinear eigenproblem at mass M, evaluated as
/// the sum of its per-particle parts. Gradients are central finite differences.
class CorrectedSurface : public Surface {
public:
  CorrectedSurface(PotentialPtr v, int j, double mass, NonlinearEigenOptions options = {});
  int particles() const override { return v_->particles(); }
  int index() const override { return j_; }
  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Vec partition(const Vec& x) const override;
  Mat partition_gradient(const Vec& x) const override;

private:
  PotentialPtr v_;
  int j_;
  double mass_;
  NonlinearEigenOptions options_;
};

}  // namespace qcons
