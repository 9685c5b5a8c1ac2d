#include "qcons/errors.hpp"
#include "qcons/geometry.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace qcons;
using namespace qcons::geometry;
using namespace testutil;

namespace {

Vec config(std::initializer_list<double> v) {
  Vec x(v.size());
  int i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

// Gradient of sum over pairs phi(r) with phi'(r) supplied.
Vec pair_gradient(const Vec& x, const std::function<double(double)>& dphi) {
  const int n = particle_count(x);
  Vec g = Vec::Zero(x.size());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const Vec3 d = particle(x, a) - particle(x, b);
      const double r = d.norm();
      g.segment<3>(3 * a) += dphi(r) * d / r;
      g.segment<3>(3 * b) -= dphi(r) * d / r;
    }
  return g;
}

}  // namespace

TEST_CASE("pair distances: small examples") {
  const Vec r = pair_distances(config({0, 0, 0, 1, 0, 0, 0, 1, 0}));
  REQUIRE(r.size() == 3);
  CHECK(r(0) == doctest::Approx(1.0));
  CHECK(r(1) == doctest::Approx(1.0));
  CHECK(r(2) == doctest::Approx(std::sqrt(2.0)));
  const Vec r2 = pair_distances(config({0, 0, 0, 0, 0, 2}));
  CHECK(r2.size() == 1);
  CHECK(r2(0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(pair_distances(config({1, 2, 3})), InvalidParameterError);
}

TEST_CASE("pair distances match a double loop and ignore rigid motion") {
  std::mt19937_64 rng(11);
  const Vec x = random_config(rng, 6);
  const Vec r = pair_distances(x);
  int p = 0;
  for (int n = 0; n < 6; ++n)
    for (int k = n + 1; k < 6; ++k) {
      CHECK(std::abs(r(p) - (particle(x, n) - particle(x, k)).norm()) <= 1e-15);
      CHECK(pair_index(n, k, 6) == p);
      ++p;
    }
  for (int trial = 0; trial < 5; ++trial) {
    const Vec y = apply_rigid(x, random_orthogonal(rng, trial % 2 == 1), random_vec3(rng, 3.0));
    CHECK((pair_distances(y) - r).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("pair direction derivative") {
  const Vec x = config({1, 0, 0, 0, 0, 0});
  CHECK((pair_direction_derivative(x, 0, 1) - Vec3(1, 0, 0)).norm() <= 1e-15);
  CHECK((pair_direction_derivative(x, 1, 0) - Vec3(-1, 0, 0)).norm() <= 1e-15);
  CHECK_THROWS_AS(pair_direction_derivative(config({1, 1, 1, 1, 1, 1}), 0, 1), CoincidentPointsError);
  CHECK_THROWS_AS(pair_direction_derivative(x, 0, 0), CoincidentPointsError);

  std::mt19937_64 rng(3);
  const Vec y = random_config(rng, 4);
  const Vec3 e = pair_direction_derivative(y, 1, 3);
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    Vec yp = y, ym = y;
    yp(3 + c) += h;
    ym(3 + c) -= h;
    const double fd = ((particle(yp, 1) - particle(yp, 3)).norm() - (particle(ym, 1) - particle(ym, 3)).norm()) / (2 * h);
    CHECK(std::abs(fd - e(c)) <= 1e-8);
  }
}

TEST_CASE("distance jacobian structure and Taylor check") {
  const Mat j2 = distance_jacobian(config({0, 0, 0, 1, 0, 0}));
  REQUIRE(j2.rows() == 1);
  Eigen::RowVectorXd expect(6);
  expect << -1, 0, 0, 1, 0, 0;
  CHECK((j2.row(0) - expect).norm() <= 1e-15);

  std::mt19937_64 rng(5);
  const Vec x = random_config(rng, 5);
  const Mat j = distance_jacobian(x);
  CHECK(j.rows() == 10);
  CHECK(j.cols() == 15);
  for (int p = 0; p < j.rows(); ++p) CHECK(std::abs(j.row(p).norm() - std::sqrt(2.0)) <= 1e-14);
  CHECK(j.block(pair_index(1, 3, 5), 0, 1, 3).norm() == 0.0);

  const Vec delta = random_config(rng, 5);
  double prev = 0.0;
  for (double h : {1e-2, 5e-3}) {
    const double err = (pair_distances(x + h * delta) - pair_distances(x) - h * j * delta).norm();
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
  CHECK_THROWS_AS(distance_jacobian(config({0, 0, 0, 0, 0, 0})), CoincidentPointsError);
}

TEST_CASE("lift of sum of squared distances gives 2r") {
  std::mt19937_64 rng(7);
  for (int n = 2; n <= 8; ++n) {
    const Vec x = random_config(rng, n);
    const Vec g = pair_gradient(x, [](double r) { return 2.0 * r; });
    const Vec v = lift_gradient_to_distances(x, g);
    const Vec r = pair_distances(x);
    CHECK((distance_jacobian(x).transpose() * v - g).norm() <= 1e-10 * std::max(1.0, g.norm()));
    if (n <= 4) CHECK((v - 2.0 * r).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("lift reproduces invariant gradients, including degenerate geometries") {
  std::mt19937_64 rng(8);
  auto dphi = [](double r) { return 2.0 * 0.7 * (1 - std::exp(-0.7 * (r - 1.1))) * std::exp(-0.7 * (r - 1.1)); };
  for (int n = 2; n <= 8; ++n) {
    for (int shape = 0; shape < 3; ++shape) {
      Vec x = random_config(rng, n, 1.5);
      for (int i = 0; i < n; ++i) {
        if (shape >= 1) x(3 * i + 2) = 0.0;  // planar
        if (shape == 2) x(3 * i + 1) = 0.0;  // collinear
      }
      const Vec g = pair_gradient(x, dphi);
      const Vec v = lift_gradient_to_distances(x, g);
      CHECK((distance_jacobian(x).transpose() * v - g).norm() <= 1e-10 * std::max(1.0, g.norm()));
      if (n <= 4 && shape == 0) {
        const Vec r = pair_distances(x);
        for (int p = 0; p < r.size(); ++p) CHECK(std::abs(v(p) - dphi(r(p))) <= 1e-8);
      }
    }
  }
}

TEST_CASE("lift of zero is zero; non-invariant gradient is rejected") {
  std::mt19937_64 rng(9);
  const Vec x = random_config(rng, 4);
  CHECK(lift_gradient_to_distances(x, Vec::Zero(12)).norm() == 0.0);
  Vec g = Vec::Zero(12);
  g(0) = 1.0;  // net force: not the gradient of an invariant function
  CHECK_THROWS_AS(lift_gradient_to_distances(x, g), ResidualTooLargeError);
}

TEST_CASE("reconstruct positions") {
  const double s = 1.0;
  Vec tet(6);
  tet.setConstant(s);
  const Vec xt = reconstruct_positions(tet, 4);
  CHECK((pair_distances(xt) - tet).cwiseAbs().maxCoeff() <= 1e-10);

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 3; ++trial) {
    const Vec x = random_config(rng, 5);
    const Vec r = pair_distances(x);
    const Vec y = reconstruct_positions(r, 5);
    CHECK((pair_distances(y) - r).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(align_rigid(x, y).rms_residual <= 1e-8);
  }
  Vec bad(3);
  bad << 1, 1, 3;
  CHECK_THROWS_AS(reconstruct_positions(bad, 3), NotRealizableError);
}

TEST_CASE("rigid alignment recovers rotations and reflections") {
  std::mt19937_64 rng(17);
  const Vec x = random_config(rng, 6);
  const auto same = align_rigid(x, x);
  CHECK((same.rotation - Mat3::Identity()).norm() <= 1e-12);
  CHECK(same.translation.norm() <= 1e-12);
  CHECK(same.rms_residual <= 1e-12);

  Mat3 rz;
  rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Vec3 shift(1, 2, 3);
  const Vec y = apply_rigid(x, rz, shift);
  // x = Q y + alpha with Q = rz^T, alpha = -rz^T shift
  const auto fit = align_rigid(x, y);
  CHECK(fit.rms_residual <= 1e-10);
  CHECK((fit.rotation - rz.transpose()).norm() <= 1e-10);
  CHECK((fit.translation + rz.transpose() * shift).norm() <= 1e-10);

  Mat3 mirror = Mat3::Identity();
  mirror(2, 2) = -1.0;
  const Vec chiral = apply_rigid(x, mirror, Vec3::Zero());
  const auto mfit = align_rigid(x, chiral);
  CHECK(mfit.rms_residual <= 1e-10);
  CHECK(mfit.rotation.determinant() == doctest::Approx(-1.0));
}
