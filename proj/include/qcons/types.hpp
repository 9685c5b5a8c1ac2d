#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qcons {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Configurations are flat vectors (x^1_1, x^1_2, x^1_3, x^2_1, ...) of length 3N.
inline int particle_count(const Vec& x) { return static_cast<int>(x.size() / 3); }

inline Vec3 particle(const Vec& x, int n) { return x.segment<3>(3 * n); }

}  // namespace qcons
