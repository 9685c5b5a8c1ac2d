#include "qcons/errors.hpp"
#include "qcons/nonlinear_eigen.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace qcons;
using namespace testutil;

namespace {

std::shared_ptr<PairMatrixPotential> model(int n) {
  TwoStateParams p;
  p.phi1 = PairFunction::morse(1.0, 1.2, 1.4);
  p.gap = PairFunction::constant(0.15);
  p.coupling_strength = 0.25;
  p.coupling_center = 1.3;
  p.coupling_width = 0.6;
  return make_two_state_model(n, p);
}

}  // namespace

TEST_CASE("scalar case: corrected surface equals the bare surface") {
  std::mt19937_64 rng(1);
  auto v = make_scalar_pair_model(4, PairFunction::morse(1.0, 1.0, 1.2));
  const Vec x = lattice_config(rng, 4, 1.3, 0.2);
  const auto cs = solve_nonlinear_eigen(*v, x, 50.0);
  CHECK(cs.lambdas_bar(0) == v->eval(x)(0, 0).real());
  CHECK(cs.residual_norm == 0.0);
  const auto eig = eigendecompose(v->eval(x));
  CHECK((cs.per_particle_bar - surface_partition(*v, x, eig)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("mass guard and invariants") {
  std::mt19937_64 rng(2);
  auto v = model(3);
  const Vec x = lattice_config(rng, 3, 1.3, 0.3);
  CHECK_THROWS_AS(solve_nonlinear_eigen(*v, x, 5.0), InvalidParameterError);
  for (double m : {10.0, 100.0, 1000.0}) {
    const auto cs = solve_nonlinear_eigen(*v, x, m);
    CHECK(cs.residual_norm <= 1e-10 * v->eval(x).norm());
    CHECK((cs.psi_bar.adjoint() * cs.psi_bar - CMat::Identity(2, 2)).norm() <= 1e-12);
    CHECK(cs.lambdas_bar(0) < cs.lambdas_bar(1));
    for (int k = 0; k < 2; ++k) CHECK(std::abs(cs.per_particle_bar.col(k).sum() - cs.lambdas_bar(k)) <= 1e-10);
  }
}

TEST_CASE("fixed point and continuation agree") {
  std::mt19937_64 rng(3);
  auto v = model(3);
  for (int trial = 0; trial < 3; ++trial) {
    const Vec x = lattice_config(rng, 3, 1.3, 0.3);
    for (double m : {10.0, 100.0}) {
      const auto fp = solve_nonlinear_eigen(*v, x, m);
      NonlinearEigenOptions opt;
      opt.mode = NonlinearEigenOptions::Mode::Continuation;
      const auto ct = solve_nonlinear_eigen(*v, x, m, opt);
      CHECK((fp.lambdas_bar - ct.lambdas_bar).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("first-order convergence in 1/M") {
  std::mt19937_64 rng(4);
  auto v = model(3);
  const Vec x = lattice_config(rng, 3, 1.3, 0.3);
  const Vec bare = eigendecompose(v->eval(x)).lambdas;
  std::vector<double> diffs;
  for (double m : {100.0, 1000.0, 10000.0}) diffs.push_back((solve_nonlinear_eigen(*v, x, m).lambdas_bar - bare).norm());
  const double slope = (std::log(diffs[2]) - std::log(diffs[0])) / (std::log(1e4) - std::log(1e2));
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.1));
  const double d1 = (solve_nonlinear_eigen(*v, x, 400.0).lambdas_bar - bare).norm();
  const double d2 = (solve_nonlinear_eigen(*v, x, 800.0).lambdas_bar - bare).norm();
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("corrected partition: large-mass limit and finite-difference eigenvectors") {
  std::mt19937_64 rng(5);
  auto v = model(3);
  const Vec x = lattice_config(rng, 3, 1.3, 0.3);
  const auto eig = eigendecompose(v->eval(x));
  const Mat bare = surface_partition(*v, x, eig);
  const auto big = solve_nonlinear_eigen(*v, x, 1e9);
  CHECK((big.per_particle_bar - bare).cwiseAbs().maxCoeff() <= 1e-8);

  const double m = 1000.0;
  const auto cs = solve_nonlinear_eigen(*v, x, m);
  std::vector<CMat> fd;
  const double h = 1e-5;
  for (int i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    fd.push_back((solve_nonlinear_eigen(*v, xp, m).psi_bar - solve_nonlinear_eigen(*v, xm, m).psi_bar) / (2 * h));
  }
  CHECK((corrected_partition(cs, *v, x, fd) - cs.per_particle_bar).cwiseAbs().maxCoeff() <= 1e-6);
}
