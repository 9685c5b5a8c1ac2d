#include "qcons/errors.hpp"
#include "qcons/mollifier.hpp"
#include "qcons/quantum_oracle.hpp"

#include <doctest.h>

#include <numbers>

using namespace qcons;
using namespace qcons::quantum;

namespace {

constexpr double kPi = std::numbers::pi;

double periodic_v(double x) { return 0.5 * std::cos(x) + 0.2 * std::cos(2 * x) + 0.1 * std::sin(3 * x); }
double smooth_a(double x) { return 1.0 + 0.3 * std::cos(x) + 0.2 * std::sin(2 * x); }

double expectation_x(const CMat& phi, const Grid& g) {
  const Vec x = g.x();
  double s = 0.0;
  for (int j = 0; j < g.n; ++j) s += x(j) * phi.row(j).squaredNorm();
  return s * g.spacing();
}

}  // namespace

TEST_CASE("grid construction is validated") {
  CHECK_THROWS_AS(make_grid(100, 0, 1, 1), InvalidParameterError);
  CHECK_THROWS_AS(make_grid(64, 1, 0, 1), InvalidParameterError);
  CHECK_THROWS_AS(make_grid(64, 0, 1, -1), InvalidParameterError);
  const Grid g = make_grid(64, -2, 2, 400);
  CHECK(g.hbar == doctest::Approx(0.05));
  CHECK(g.k()(1) == doctest::Approx(2 * kPi / 4));
  CHECK(g.k()(63) == doctest::Approx(-2 * kPi / 4));
}

TEST_CASE("free gaussian packet disperses as the closed form") {
  const Grid g = make_grid(512, -10, 10, 25.0);
  const double x0 = -1.0, p0 = 0.7, tau = 2.0, hb = g.hbar;
  CMat phi = coherent_packet(g, x0, p0);
  propagate(phi, g, scalar_line_model([](double) { return 0.0; }), tau, 0.05);
  const Vec x = g.x();
  double worst = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const Complex s(1.0, tau);
    const double d = x(j) - x0;
    const Complex exact = std::pow(kPi * hb, -0.25) / std::sqrt(s) *
                          std::exp(-(d - p0 * tau) * (d - p0 * tau) / (2.0 * hb * s) +
                                   Complex(0.0, p0 * d / hb - p0 * p0 * tau / (2.0 * hb)));
    worst = std::max(worst, std::abs(phi(j, 0) - exact));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("harmonic coherent state follows the classical orbit") {
  const Grid g = make_grid(256, -6, 6, 100.0);
  const auto model = scalar_line_model([](double x) { return 0.5 * x * x; });
  CMat phi = coherent_packet(g, 1.0, 0.5);
  propagate(phi, g, model, 1.0, 2e-4);
  CHECK(expectation_x(phi, g) == doctest::Approx(std::cos(1.0) + 0.5 * std::sin(1.0)).epsilon(1e-7));
}

TEST_CASE("split step preserves the norm and converges at second order") {
  const Grid g = make_grid(256, -5, 5, 100.0);
  const auto model = scalar_line_model([](double x) { return 0.5 * x * x + 0.25 * x * x * x * x; });
  CMat phi = coherent_packet(g, 1.0, 0.0);
  SplitStep s(g, model, 1e-4);
  for (int k = 0; k < 10000; ++k) s.step(phi);
  CHECK(std::abs(norm(phi, g) - 1.0) <= 1e-10);

  auto run = [&](double dt) {
    CMat psi = coherent_packet(g, 1.0, 0.0);
    propagate(psi, g, model, 0.5, dt);
    return psi;
  };
  const CMat ref = run(1e-4), a = run(4e-3), b = run(2e-3);
  const double ratio = (a - ref).norm() / (b - ref).norm();
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("under-resolved packets are rejected") {
  const Grid g = make_grid(64, -4, 4, 1e4);
  CMat phi = coherent_packet(g, 0.0, 0.3);
  CHECK_THROWS_AS(propagate(phi, g, scalar_line_model([](double) { return 0.0; }), 0.1, 0.01), ResolutionError);
}

TEST_CASE("weyl quantization of low degree symbols") {
  const Grid g = make_grid(64, -kPi, kPi, 50.0);
  const CMat one = weyl_quantize(g, {{0, [](double) { return 1.0; }}});
  CHECK((one - CMat::Identity(64, 64)).norm() <= 1e-12);
  const CMat p = weyl_quantize(g, {{1, [](double) { return 1.0; }}});
  CHECK((p - momentum_operator(g)).norm() <= 1e-12 * p.norm());
  for (int d = 0; d <= 2; ++d) {
    const CMat a = weyl_quantize(g, {{d, smooth_a}});
    CHECK((a - a.adjoint()).norm() <= 1e-12 * a.norm());
  }
  CHECK_THROWS_AS(weyl_quantize(g, {{3, smooth_a}}), UnsupportedSymbolError);
  CHECK_NOTHROW(weyl_quantize(g, {{3, smooth_a}}, true));
  CHECK_THROWS_AS(momentum_operator(make_grid(2048, 0, 1, 1)), GridTooLargeError);
}

TEST_CASE("symmetrized a p matches the Weyl integral on a 64-point grid") {
  const Grid g = make_grid(64, -kPi, kPi, 4.0);
  const auto a = [](double x) { return std::sin(2 * x) + 0.5 * std::cos(2 * x); };
  const CMat op = weyl_quantize(g, {{1, a}});
  const Vec x = g.x(), k = g.k();
  CVec phi = coherent_packet(g, 0.3, 0.4);
  CVec brute = CVec::Zero(g.n);
  for (int j = 0; j < g.n; ++j)
    for (int l = 0; l < g.n; ++l) {
      Complex kernel = 0.0;
      for (int m = 0; m < g.n; ++m) {
        if (m == g.n / 2) continue;
        kernel += g.hbar * k(m) * std::exp(Complex(0.0, k(m) * (x(j) - x(l))));
      }
      brute(j) += kernel / static_cast<double>(g.n) * a(0.5 * (x(j) + x(l))) * phi(l);
    }
  CHECK((op * phi - brute).norm() <= 1e-8 * brute.norm());
}

TEST_CASE("products of position symbols compose pointwise") {
  const Grid g = make_grid(64, -kPi, kPi, 10.0);
  const auto a = [](double x) { return std::cos(x); };
  const auto b = [](double x) { return 2.0 + std::sin(3 * x); };
  const CMat ab = weyl_quantize(g, {{0, [&](double x) { return a(x) * b(x); }}});
  CHECK((weyl_quantize(g, {{0, a}}) * weyl_quantize(g, {{0, b}}) - ab).norm() <= 1e-10);
}

TEST_CASE("commutator equals the quantized bracket up to degree two") {
  const Grid g = make_grid(64, -kPi, kPi, 100.0);
  for (int d = 0; d <= 2; ++d) {
    const auto r = commutator_check(g, periodic_v, {{d, smooth_a}});
    CHECK(r.discrepancy <= 1e-8);
    CHECK(r.passed);
  }
  const auto zero = commutator_check(g, periodic_v, {{0, [](double) { return 3.0; }}});
  CHECK(zero.commutator_norm <= 1e-12);
  CHECK(zero.passed);
  Mollifier m(1.5);
  const auto mass = commutator_check(g, periodic_v, {{0, [&](double x) { return m.eval(Vec3(x, 0, 0)); }}});
  CHECK(mass.discrepancy <= 1e-8);
}

TEST_CASE("degree three symbols break the reduction") {
  const Grid g = make_grid(64, -kPi, kPi, 100.0);
  CHECK_THROWS_AS(commutator_check(g, periodic_v, {{3, smooth_a}}), UnsupportedSymbolError);
  CommutatorOptions o;
  o.negative_control = true;
  const auto r = commutator_check(g, periodic_v, {{3, smooth_a}}, o);
  CHECK(r.discrepancy >= kNegativeControlFloor);
  CHECK(r.passed);
}

TEST_CASE("harmonic egorov control is exact up to propagation error") {
  EgorovOptions o;
  o.masses = {50.0, 200.0};
  o.classical_steps = 1000;
  const auto r = egorov_test(scalar_line_model([](double x) { return 0.5 * x * x; }, [](double x) { return x; }), o);
  CHECK(r.within_propagation_tolerance);
  for (const auto& p : r.points) CHECK(p.error <= 1e-8);
}

TEST_CASE("anharmonic egorov error decays like one over mass") {
  EgorovOptions o;
  o.masses = {50.0, 200.0};
  o.classical_steps = 1000;
  const auto r = egorov_test(
      scalar_line_model([](double x) { return 0.5 * x * x + 0.25 * x * x * x * x; }, [](double x) { return x + x * x * x; }),
      o);
  CHECK(r.slope <= -0.8);
  CHECK(r.passed);
  const auto j = egorov_report_json(r);
  CHECK(j["points"].size() == 2);
}

TEST_CASE("two state egorov reports the off-surface population") {
  LineModel m;
  m.dim = 2;
  m.v = [](double x) {
    CMat v(2, 2);
    const double c = 0.2 * std::exp(-x * x);
    v << 0.5 * x * x, c, c, 0.5 * x * x + 1.0;
    return v;
  };
  EgorovOptions o;
  o.masses = {50.0, 200.0};
  o.classical_steps = 500;
  o.table_points = 512;
  const auto r = egorov_test(m, o);
  CHECK(r.points[1].off_surface < r.points[0].off_surface);
  CHECK(r.points[0].off_surface >= 0.0);
}
