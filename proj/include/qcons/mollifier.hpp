#pragma once

#include "qcons/types.hpp"

namespace qcons {

/// Compactly supported bump eta(y) = C eps^-3 exp(-1 / (1 - |y/eps|^2)), |y| < eps.
///
/// Immutable after construction; every member is safe to call concurrently.
class Mollifier {
public:
  /// Throws InvalidParameterError unless epsilon > 0.
  explicit Mollifier(double epsilon);

  double epsilon() const { return epsilon_; }
  /// The constant C, fixed so that eta integrates to one.
  double normalization() const { return normalization_; }

  double eval(const Vec3& y) const;
  Vec3 grad(const Vec3& y) const;

  struct BondValue {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();  ///< derivative with respect to the probe y
  };

  /// int_0^1 eta(y - s a - (1 - s) b) ds and its y-gradient, by adaptive
  /// 16-point Gauss-Legendre bisection over the part of the segment inside the support.
  BondValue bond(const Vec3& y, const Vec3& a, const Vec3& b) const;

  double bond_integral(const Vec3& y, const Vec3& a, const Vec3& b) const {
    return bond(y, a, b).value;
  }
  Vec3 bond_integral_grad(const Vec3& y, const Vec3& a, const Vec3& b) const {
    return bond(y, a, b).grad;
  }

  /// Absolute tolerance of the bond quadrature.
  static constexpr double kBondTolerance = 1e-12;

private:
  double epsilon_;
  double normalization_;
  double prefactor_;  // C / eps^3
};

}  // namespace qcons
