#include "qcons/quantum_oracle.hpp"

#include "qcons/errors.hpp"
#include "qcons/format.hpp"
#include "qcons/parallel.hpp"
#include "qcons/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace qcons::quantum {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Vec Grid::x() const { return Vec::LinSpaced(n, lo, lo + spacing() * (n - 1)); }

Vec Grid::k() const {
  Vec k(n);
  const double base = 2.0 * std::numbers::pi / length();
  for (int j = 0; j < n; ++j) k(j) = base * (j <= n / 2 ? j : j - n);
  return k;
}

double Grid::k_nyquist() const { return std::numbers::pi / spacing(); }

Grid make_grid(int n, double lo, double hi, double mass) {
  if (!power_of_two(n) || n < 8) throw InvalidParameterError("grid size must be a power of two >= 8, got " + std::to_string(n));
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidParameterError("grid box needs hi > lo");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidParameterError("mass must be positive");
  return Grid{n, lo, hi, 1.0 / std::sqrt(mass)};
}

LineModel scalar_line_model(LineFunction v, LineFunction dv) {
  if (!v) throw InvalidParameterError("scalar model needs a potential");
  LineModel m;
  m.dim = 1;
  m.v = [v](double x) { return CMat::Constant(1, 1, Complex(v(x), 0.0)); };
  if (dv) m.dv = [dv](double x) { return CMat::Constant(1, 1, Complex(dv(x), 0.0)); };
  return m;
}

namespace {

CMat line_derivative(const LineModel& m, double x) {
  if (m.dv) return m.dv(x);
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (m.v(x + h) - m.v(x - h)) / (2.0 * h);
}

}  // namespace

LinePotential::LinePotential(LineModel model) : model_(std::move(model)) {
  if (model_.dim < 1 || !model_.v) throw InvalidParameterError("line model needs a dimension and a potential");
}

CMat LinePotential::eval(const Vec& x) const { return model_.v(x(0)); }

CMat LinePotential::eval_part(const Vec& x, int n) const {
  if (n != 0) throw InvalidParameterError("line potential has one particle");
  return eval(x);
}

CMat LinePotential::eval_deriv(const Vec& x, int i) const {
  if (i != 0) return CMat::Zero(model_.dim, model_.dim);
  return line_derivative(model_, x(0));
}

CMat LinePotential::eval_part_deriv(const Vec& x, int n, int i) const {
  if (n != 0) throw InvalidParameterError("line potential has one particle");
  return eval_deriv(x, i);
}

Fft::Fft(int n) : n_(n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_complex* buf = fftw_alloc_complex(n);
  forward_plan_ = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_plan_ = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

CVec Fft::forward(const CVec& in) const {
  CVec src = in, out(n_);
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

CVec Fft::inverse(const CVec& in) const {
  CVec src = in, out(n_);
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

double norm(const CMat& phi, const Grid& g) { return std::sqrt(g.spacing() * phi.squaredNorm()); }

CVec coherent_packet(const Grid& g, double x0, double p0) {
  const Vec x = g.x();
  CVec phi = CVec::Zero(g.n);
  for (int image = -1; image <= 1; ++image)
    for (int j = 0; j < g.n; ++j) {
      const double d = x(j) - x0 + image * g.length();
      phi(j) += std::exp(Complex(-d * d / (2.0 * g.hbar), p0 * d / g.hbar));
    }
  return phi / norm(phi, g);
}

double spectral_tail(const CMat& phi, const Grid& g, const Fft& fft, double fraction) {
  const Vec k = g.k();
  const double cut = fraction * g.k_nyquist();
  double tail = 0.0, total = 0.0;
  for (int c = 0; c < phi.cols(); ++c) {
    const CVec f = fft.forward(phi.col(c));
    for (int j = 0; j < g.n; ++j) {
      const double w = std::norm(f(j));
      total += w;
      if (std::abs(k(j)) > cut) tail += w;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

double stable_step(const Grid& g, const LineModel& model) {
  const Vec x = g.x();
  double vmax = 0.0;
  for (int j = 0; j < g.n; ++j) {
    Eigen::SelfAdjointEigenSolver<CMat> es(model.v(x(j)), Eigen::EigenvaluesOnly);
    vmax = std::max(vmax, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  const double kinetic = 0.5 * g.hbar * g.k_nyquist() * g.k_nyquist();
  double dt = 1.0 / kinetic;
  if (vmax > 0.0) dt = std::min(dt, 0.1 * g.hbar / vmax);
  return dt;
}

SplitStep::SplitStep(const Grid& g, const LineModel& model, double dt)
    : g_(g), dim_(model.dim), dt_(dt), fft_(g.n) {
  if (!(dt > 0.0)) throw InvalidParameterError("time step must be positive");
  const Vec k = g.k(), x = g.x();
  kinetic_.resize(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double kk = j == g.n / 2 ? g.k_nyquist() : k(j);
    kinetic_(j) = std::exp(Complex(0.0, -dt * g.hbar * kk * kk / 2.0)) / static_cast<double>(g.n);
  }
  half_potential_.reserve(g.n);
  for (int j = 0; j < g.n; ++j) {
    const CMat v = model.v(x(j));
    if (v.rows() != dim_ || v.cols() != dim_) throw InvalidParameterError("potential has the wrong dimension");
    Eigen::SelfAdjointEigenSolver<CMat> es(v);
    const Vec lam = es.eigenvalues();
    vmax_ = std::max(vmax_, lam.cwiseAbs().maxCoeff());
    CVec phase(dim_);
    for (int a = 0; a < dim_; ++a) phase(a) = std::exp(Complex(0.0, -0.5 * dt * lam(a) / g.hbar));
    half_potential_.push_back(es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint());
  }
}

void SplitStep::step(CMat& phi) const {
  auto potential = [&] {
    if (dim_ == 1) {
      for (int j = 0; j < g_.n; ++j) phi(j, 0) *= half_potential_[j](0, 0);
    } else {
      for (int j = 0; j < g_.n; ++j) phi.row(j) = (half_potential_[j] * phi.row(j).transpose()).transpose();
    }
  };
  potential();
  for (int c = 0; c < dim_; ++c) phi.col(c) = fft_.inverse(fft_.forward(phi.col(c)).cwiseProduct(kinetic_));
  potential();
}

void SplitStep::check_resolution(const CMat& phi) const {
  const double tail = spectral_tail(phi, g_, fft_);
  if (tail > kResolutionTolerance)
    throw ResolutionError("wavefunction spectral weight " + num(tail) + " beyond " + num(kResolvedFraction) +
                          " of Nyquist on a " + std::to_string(g_.n) + "-point grid");
}

void propagate(CMat& phi, const Grid& g, const LineModel& model, double tau, double dt) {
  if (!(tau >= 0.0) || !(dt > 0.0)) throw InvalidParameterError("propagation needs tau >= 0 and dt > 0");
  const long steps = std::max(1L, static_cast<long>(std::ceil(tau / dt - 1e-12)));
  SplitStep s(g, model, tau / steps);
  s.check_resolution(phi);
  for (long k = 0; k < steps; ++k) s.step(phi);
  s.check_resolution(phi);
}

namespace {

// Dense discrete Fourier basis e_m(x_j) = exp(2 pi i j m / n).
CMat fourier_basis(int n) {
  CMat e(n, n);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(j) * m) % n) / n;
      e(j, m) = Complex(std::cos(angle), std::sin(angle));
    }
  return e;
}

CMat spectral_operator(const Grid& g, const CVec& symbol) {
  if (g.n > kMaxDensePoints)
    throw GridTooLargeError("dense assembly is limited to " + std::to_string(kMaxDensePoints) + " points");
  const CMat e = fourier_basis(g.n);
  return e * symbol.asDiagonal() * e.adjoint() / static_cast<double>(g.n);
}

CVec momentum_symbol(const Grid& g) {
  CVec s = (g.hbar * g.k()).cast<Complex>();
  s(g.n / 2) = 0.0;
  return s;
}

Vec sample(const Grid& g, const LineFunction& f) {
  const Vec x = g.x();
  Vec out(g.n);
  for (int j = 0; j < g.n; ++j) out(j) = f(x(j));
  return out;
}

double binomial(int m, int j) {
  double c = 1.0;
  for (int i = 1; i <= j; ++i) c = c * (m - j + i) / i;
  return c;
}

// Weyl quantization of sum_m a_m(x_j) p^m from grid samples.
CMat weyl_from_samples(const Grid& g, const std::vector<std::pair<int, Vec>>& terms) {
  if (g.n > kMaxDensePoints)
    throw GridTooLargeError("dense assembly is limited to " + std::to_string(kMaxDensePoints) + " points");
  int top = 0;
  for (const auto& t : terms) top = std::max(top, t.first);
  const CMat p = momentum_operator(g);
  std::vector<CMat> powers{CMat::Identity(g.n, g.n)};
  for (int m = 1; m <= top; ++m) powers.push_back(powers.back() * p);
  CMat out = CMat::Zero(g.n, g.n);
  for (const auto& [m, a] : terms) {
    if (m < 0) throw UnsupportedSymbolError("negative momentum degree");
    const CMat amat = multiplication_operator(a);
    CMat term = CMat::Zero(g.n, g.n);
    for (int j = 0; j <= m; ++j) term += binomial(m, j) * powers[j] * amat * powers[m - j];
    out += term / std::pow(2.0, m);
  }
  return out;
}

double operator_norm(const CMat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<CMat> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

CMat momentum_operator(const Grid& g) { return spectral_operator(g, momentum_symbol(g)); }

CMat multiplication_operator(const Vec& values) { return values.cast<Complex>().asDiagonal(); }

Vec spectral_derivative(const Vec& f, const Grid& g) {
  Fft fft(g.n);
  CVec ik = (Complex(0.0, 1.0) * g.k().cast<Complex>()).eval();
  ik(g.n / 2) = 0.0;
  return (fft.inverse(fft.forward(f.cast<Complex>()).cwiseProduct(ik)) / static_cast<double>(g.n)).real();
}

int symbol_degree(const Symbol& s) {
  int d = 0;
  for (const auto& t : s) d = std::max(d, t.degree);
  return d;
}

CMat weyl_quantize(const Grid& g, const Symbol& s, bool allow_high_degree) {
  std::vector<std::pair<int, Vec>> terms;
  for (const auto& t : s) {
    if (t.degree < 0 || !t.a) throw UnsupportedSymbolError("symbol terms need a function and degree >= 0");
    if (t.degree > 2 && !allow_high_degree)
      throw UnsupportedSymbolError("momentum degree " + std::to_string(t.degree) +
                                   " exceeds 2; only the negative control may use it");
    terms.emplace_back(t.degree, sample(g, t.a));
  }
  return weyl_from_samples(g, terms);
}

CommutatorReport commutator_check(const Grid& g, const LineFunction& v, const Symbol& a,
                                  const CommutatorOptions& options) {
  if (!v) throw InvalidParameterError("commutator check needs a potential");
  if (!(options.band_fraction > 0.0 && options.band_fraction <= 1.0))
    throw InvalidParameterError("band fraction must lie in (0, 1]");
  const int degree = symbol_degree(a);
  if (degree > 2 && !options.negative_control)
    throw UnsupportedSymbolError("momentum degree " + std::to_string(degree) +
                                 " exceeds 2; enable the negative control to use it");
  if (g.n > kMaxDensePoints)
    throw GridTooLargeError("dense assembly is limited to " + std::to_string(kMaxDensePoints) + " points");

  const Vec vs = sample(g, v);
  const Vec dv = spectral_derivative(vs, g);
  const CMat h = weyl_from_samples(g, {{2, Vec::Constant(g.n, 0.5)}, {0, vs}});
  const CMat amat = weyl_quantize(g, a, true);
  const CMat comm = Complex(0.0, 1.0 / g.hbar) * (h * amat - amat * h);

  std::vector<std::pair<int, Vec>> bracket;
  for (const auto& t : a) {
    const Vec as = sample(g, t.a);
    bracket.emplace_back(t.degree + 1, spectral_derivative(as, g));
    if (t.degree >= 1) bracket.emplace_back(t.degree - 1, -t.degree * dv.cwiseProduct(as));
  }
  const CMat br = weyl_from_samples(g, bracket);

  CVec mask(g.n);
  const Vec k = g.k();
  for (int j = 0; j < g.n; ++j)
    mask(j) = (j != g.n / 2 && std::abs(k(j)) <= options.band_fraction * g.k_nyquist()) ? 1.0 : 0.0;
  const CMat proj = spectral_operator(g, mask);
  const CMat pc = proj * comm * proj, pb = proj * br * proj;

  CommutatorReport r;
  r.n_points = g.n;
  r.mass = 1.0 / (g.hbar * g.hbar);
  r.degree = degree;
  r.band_fraction = options.band_fraction;
  r.commutator_norm = operator_norm(pc);
  r.bracket_norm = operator_norm(pb);
  const double diff = operator_norm(pc - pb);
  r.discrepancy = r.bracket_norm > 0.0 ? diff / r.bracket_norm : diff;
  r.tolerance = options.tolerance;
  r.negative_control = options.negative_control;
  r.passed = options.negative_control ? r.discrepancy >= kNegativeControlFloor : r.discrepancy <= options.tolerance;
  return r;
}

namespace {

// lambda_bar_j and its slope tabulated on a uniform grid, evaluated by cubic Hermite interpolation.
class SurfaceTable {
public:
  SurfaceTable(const LineModel& model, int j, double mass, double lo, double hi, int points,
               const NonlinearEigenOptions& options)
      : lo_(lo), h_((hi - lo) / (points - 1)), value_(points), slope_(points) {
    LinePotential pot(model);
    auto lambda_bar = [&](double x) {
      Vec xx = Vec::Zero(3);
      xx(0) = x;
      return solve_nonlinear_eigen(pot, xx, mass, options).lambdas_bar(j);
    };
    const double d = 1e-5;
    for (int i = 0; i < points; ++i) {
      const double x = lo + i * h_;
      value_(i) = lambda_bar(x);
      slope_(i) = (lambda_bar(x + d) - lambda_bar(x - d)) / (2.0 * d);
    }
  }

  double slope(double x) const {
    const double s = (x - lo_) / h_;
    const int i = static_cast<int>(std::floor(s));
    if (i < 0 || i + 1 >= value_.size()) throw ResolutionError("classical trajectory left the tabulated box");
    const double t = s - i;
    const double p0 = value_(i), p1 = value_(i + 1), m0 = slope_(i) * h_, m1 = slope_(i + 1) * h_;
    const double dh00 = 6 * t * t - 6 * t, dh10 = 3 * t * t - 4 * t + 1, dh01 = -dh00, dh11 = 3 * t * t - 2 * t;
    return (dh00 * p0 + dh10 * m0 + dh01 * p1 + dh11 * m1) / h_;
  }

private:
  double lo_, h_;
  Vec value_, slope_;
};

// Adiabatic eigenvector j along the grid with a continuous phase.
CMat surface_frame(const Grid& g, const LineModel& model, int j) {
  const Vec x = g.x();
  CMat frame(g.n, model.dim);
  EigenData prev;
  for (int i = 0; i < g.n; ++i) {
    EigenData e = eigendecompose(model.v(x(i)));
    if (i > 0) align_phases(e, prev.psi);
    frame.row(i) = e.psi.col(j).transpose();
    prev = std::move(e);
  }
  return frame;
}

struct Packet {
  double x0, p0, weight;
};

std::vector<Packet> packet_set(const EgorovOptions& o) {
  if (o.packets == 1) return {{o.x0, o.p0, 1.0}};
  if (o.packets != 16) throw InvalidParameterError("packets must be 1 or 16");
  if (!(o.packet_temperature > 0.0)) throw InvalidParameterError("packet temperature must be positive");
  const auto gh = quadrature::gauss_hermite(4);
  const double s = std::sqrt(2.0 * o.packet_temperature);
  std::vector<Packet> out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      out.push_back({o.x0 + s * gh.nodes[a], o.p0 + s * gh.nodes[b], gh.weights[a] * gh.weights[b] / std::numbers::pi});
  return out;
}

struct QuantumRun {
  double value = 0.0;
  double norm_drift = 0.0;
  double off_surface = 0.0;
  long steps = 0;
};

QuantumRun quantum_expectation(const Grid& g, const LineModel& model, const CMat& frame, const Vec& obs,
                               const std::vector<Packet>& packets, double tau, double dt) {
  QuantumRun r;
  const long steps = std::max(1L, static_cast<long>(std::ceil(tau / dt - 1e-12)));
  SplitStep stepper(g, model, tau / steps);
  r.steps = steps;
  for (const auto& pk : packets) {
    const CVec packet = coherent_packet(g, pk.x0, pk.p0);
    CMat phi(g.n, model.dim);
    for (int c = 0; c < model.dim; ++c) phi.col(c) = packet.cwiseProduct(frame.col(c));
    stepper.check_resolution(phi);
    for (long k = 0; k < steps; ++k) stepper.step(phi);
    stepper.check_resolution(phi);
    double value = 0.0, on = 0.0;
    for (int i = 0; i < g.n; ++i) {
      value += obs(i) * phi.row(i).squaredNorm();
      on += std::norm(frame.row(i).conjugate().dot(phi.row(i)));
    }
    const double h = g.spacing();
    r.value += pk.weight * value * h;
    r.off_surface += pk.weight * (1.0 - on * h);
    r.norm_drift = std::max(r.norm_drift, std::abs(norm(phi, g) - 1.0));
  }
  return r;
}

// Wigner average of A along the classical flow of p^2 / 2 + lambda_bar_j.
double classical_expectation(const std::function<double(double)>& slope, const LineFunction& obs,
                             const std::vector<Packet>& packets, double hbar, const EgorovOptions& o) {
  const auto gh = quadrature::gauss_hermite(o.wigner_nodes);
  const double s = std::sqrt(hbar);
  const double dt = o.tau / o.classical_steps;
  double total = 0.0;
  for (const auto& pk : packets)
    for (int a = 0; a < o.wigner_nodes; ++a)
      for (int b = 0; b < o.wigner_nodes; ++b) {
        double x = pk.x0 + s * gh.nodes[a], p = pk.p0 + s * gh.nodes[b];
        for (int k = 0; k < o.classical_steps; ++k) {
          const double k1x = p, k1p = -slope(x);
          const double k2x = p + 0.5 * dt * k1p, k2p = -slope(x + 0.5 * dt * k1x);
          const double k3x = p + 0.5 * dt * k2p, k3p = -slope(x + 0.5 * dt * k2x);
          const double k4x = p + dt * k3p, k4p = -slope(x + dt * k3x);
          x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
          p += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        }
        total += pk.weight * gh.weights[a] * gh.weights[b] / std::numbers::pi * obs(x);
      }
  return total;
}

EgorovPoint egorov_point(const LineModel& model, const EgorovOptions& o, double mass) {
  const auto packets = packet_set(o);
  EgorovPoint pt;
  pt.mass = mass;
  for (int n = o.min_points; n <= o.max_points; n *= 2) {
    const Grid g = make_grid(n, o.lo, o.hi, mass);
    try {
      const CMat frame = surface_frame(g, model, o.surface);
      Vec obs(g.n);
      const Vec x = g.x();
      for (int i = 0; i < g.n; ++i) obs(i) = o.observable(x(i));
      const double dt = stable_step(g, model);
      const QuantumRun coarse = quantum_expectation(g, model, frame, obs, packets, o.tau, dt);
      const QuantumRun fine = quantum_expectation(g, model, frame, obs, packets, o.tau, 0.5 * dt);
      pt.hbar = g.hbar;
      pt.n_points = n;
      pt.dt = o.tau / fine.steps;
      pt.steps = fine.steps;
      pt.quantum = (4.0 * fine.value - coarse.value) / 3.0;
      pt.propagation_error = std::abs(fine.value - coarse.value) / 3.0;
      pt.norm_drift = fine.norm_drift;
      pt.off_surface = fine.off_surface;
      break;
    } catch (const ResolutionError&) {
      if (2 * n > o.max_points) throw;
    }
  }
  std::function<double(double)> slope;
  std::unique_ptr<SurfaceTable> table;
  if (model.dim == 1) {
    slope = [&](double x) { return line_derivative(model, x)(0, 0).real(); };
  } else {
    table = std::make_unique<SurfaceTable>(model, o.surface, mass, o.lo, o.hi, o.table_points, o.eigen);
    slope = [&](double x) { return table->slope(x); };
  }
  pt.classical = classical_expectation(slope, o.observable, packets, pt.hbar, o);
  pt.error = std::abs(pt.quantum - pt.classical);
  return pt;
}

}  // namespace

EgorovReport egorov_test(const LineModel& model, const EgorovOptions& options) {
  if (model.dim < 1 || !model.v) throw InvalidParameterError("egorov test needs a potential");
  if (options.surface < 0 || options.surface >= model.dim) throw InvalidParameterError("surface index out of range");
  if (options.masses.size() < 2) throw InvalidParameterError("slope fit needs at least two masses");
  if (!(options.tau >= 0.0) || options.classical_steps < 1 || options.wigner_nodes < 2 || !options.observable)
    throw InvalidParameterError("invalid egorov options");
  if (options.max_points > kMaxDensePoints)
    throw GridTooLargeError("grids are limited to " + std::to_string(kMaxDensePoints) + " points");
  for (double m : options.masses)
    if (!(m > 0.0)) throw InvalidParameterError("masses must be positive");

  EgorovReport r;
  r.points.resize(options.masses.size());
  parallel_for(static_cast<int>(options.masses.size()), options.workers,
               [&](int i) { r.points[i] = egorov_point(model, options, options.masses[i]); });
  const int n = static_cast<int>(r.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  r.within_propagation_tolerance = true;
  for (const auto& p : r.points) {
    const double lx = std::log(p.mass), ly = std::log(std::max(p.error, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    if (p.error > 10.0 * p.propagation_error + 1e-12) r.within_propagation_tolerance = false;
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.slope_threshold = options.slope_threshold;
  r.passed = r.slope <= options.slope_threshold;
  return r;
}

nlohmann::json commutator_report_json(const CommutatorReport& r) {
  return {{"grid_points", r.n_points},
          {"M", r.mass},
          {"hbar", 1.0 / std::sqrt(r.mass)},
          {"degree", r.degree},
          {"band_fraction", r.band_fraction},
          {"commutator_norm", r.commutator_norm},
          {"bracket_norm", r.bracket_norm},
          {"discrepancy", r.discrepancy},
          {"tolerance", r.negative_control ? kNegativeControlFloor : r.tolerance},
          {"negative_control", r.negative_control},
          {"passed", r.passed}};
}

nlohmann::json egorov_report_json(const EgorovReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points)
    pts.push_back({{"M", p.mass},
                   {"hbar", p.hbar},
                   {"grid_points", p.n_points},
                   {"dt", p.dt},
                   {"steps", p.steps},
                   {"quantum", p.quantum},
                   {"classical", p.classical},
                   {"error", p.error},
                   {"propagation_error", p.propagation_error},
                   {"norm_drift", p.norm_drift},
                   {"off_surface_population", p.off_surface}});
  return {{"points", pts},
          {"slope", r.slope},
          {"slope_threshold", r.slope_threshold},
          {"within_propagation_tolerance", r.within_propagation_tolerance},
          {"passed", r.passed}};
}

}  // namespace qcons::quantum
