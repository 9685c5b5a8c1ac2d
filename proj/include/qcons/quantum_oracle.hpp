#pragma once

#include "qcons/nonlinear_eigen.hpp"
#include "qcons/potential.hpp"
#include "qcons/types.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <vector>

namespace qcons::quantum {

/// Largest grid accepted for dense operator assembly.
inline constexpr int kMaxDensePoints = 1024;
/// Fraction of the Nyquist wavenumber a propagated state may occupy.
inline constexpr double kResolvedFraction = 0.8;
inline constexpr double kResolutionTolerance = 1e-10;
/// Relative discrepancy the degree-3 control must exceed.
inline constexpr double kNegativeControlFloor = 1e-3;

/// Periodic 1D grid x_j = lo + j h with hbar = M^{-1/2}.
struct Grid {
  int n = 0;
  double lo = 0.0;
  double hi = 1.0;
  double hbar = 1.0;

  double spacing() const { return (hi - lo) / n; }
  double length() const { return hi - lo; }
  Vec x() const;
  /// Angular wavenumbers in FFT order.
  Vec k() const;
  double k_nyquist() const;
};

/// Throws InvalidParameterError unless n is a power of two (>= 8), hi > lo and mass > 0.
Grid make_grid(int n, double lo, double hi, double mass);

using LineFunction = std::function<double(double)>;
using LineMatrixFunction = std::function<CMat(double)>;

/// Hermitian d x d potential along one nuclear coordinate.
struct LineModel {
  int dim = 1;
  LineMatrixFunction v;
  LineMatrixFunction dv;  ///< optional; central differences otherwise
};

LineModel scalar_line_model(LineFunction v, LineFunction dv = {});

/// One particle whose matrix potential depends on its first coordinate only.
class LinePotential : public MatrixPotential {
public:
  explicit LinePotential(LineModel model);
  int dim() const override { return model_.dim; }
  int particles() const override { return 1; }
  CMat eval(const Vec& x) const override;
  CMat eval_part(const Vec& x, int n) const override;
  CMat eval_deriv(const Vec& x, int i) const override;
  CMat eval_part_deriv(const Vec& x, int n, int i) const override;

private:
  LineModel model_;
};

/// Forward and inverse discrete Fourier transforms of length n (inverse is unnormalized).
class Fft {
public:
  explicit Fft(int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  CVec forward(const CVec& in) const;
  CVec inverse(const CVec& in) const;

private:
  int n_;
  void* forward_plan_;
  void* inverse_plan_;
};

double norm(const CMat& phi, const Grid& g);

/// Minimal-uncertainty packet (pi hbar)^{-1/4} exp(-(x - x0)^2 / (2 hbar) + i p0 (x - x0) / hbar), periodized.
CVec coherent_packet(const Grid& g, double x0, double p0);

/// Spectral weight of all components above the given fraction of Nyquist.
double spectral_tail(const CMat& phi, const Grid& g, const Fft& fft, double fraction = kResolvedFraction);

/// Strang split-step propagator for hbar d_tau phi = -i (p^2 / 2 + V) phi, phi stored n x d.
class SplitStep {
public:
  SplitStep(const Grid& g, const LineModel& model, double dt);
  void step(CMat& phi) const;
  /// Throws ResolutionError when the spectral tail exceeds kResolutionTolerance.
  void check_resolution(const CMat& phi) const;
  double dt() const { return dt_; }
  double max_abs_potential() const { return vmax_; }

private:
  Grid g_;
  int dim_;
  double dt_;
  double vmax_ = 0.0;
  Fft fft_;
  CVec kinetic_;
  std::vector<CMat> half_potential_;
};

/// Largest step with dt * max|V| <= 0.1 hbar.
double stable_step(const Grid& g, const LineModel& model);

/// Propagates phi to tau in whole steps no longer than dt; checks resolution at start and end.
void propagate(CMat& phi, const Grid& g, const LineModel& model, double tau, double dt);

/// Dense spectral momentum operator -i hbar d/dx (Nyquist mode dropped).
CMat momentum_operator(const Grid& g);
CMat multiplication_operator(const Vec& values);
/// Spectral derivative of periodic grid samples.
Vec spectral_derivative(const Vec& f, const Grid& g);

/// Scalar symbol sum_m a_m(x) p^m.
struct SymbolTerm {
  int degree = 0;
  LineFunction a;
};
using Symbol = std::vector<SymbolTerm>;

int symbol_degree(const Symbol& s);

/// Weyl quantization 2^{-m} sum_j C(m, j) P^j A P^{m-j} of every term. Degrees above 2 need allow_high_degree.
CMat weyl_quantize(const Grid& g, const Symbol& s, bool allow_high_degree = false);

struct CommutatorReport {
  int n_points = 0;
  double mass = 0.0;
  int degree = 0;
  double band_fraction = 0.0;
  double commutator_norm = 0.0;
  double bracket_norm = 0.0;
  double discrepancy = 0.0;  ///< relative operator-norm difference
  double tolerance = 0.0;
  bool negative_control = false;
  bool passed = false;
};

struct CommutatorOptions {
  double tolerance = 1e-8;
  double band_fraction = 0.125;
  bool negative_control = false;
};

/// Compares i M^{1/2} [H, A] with the quantized Poisson bracket for H = p^2 / 2 + v(x), both projected onto
/// wavenumbers below band_fraction * Nyquist.
CommutatorReport commutator_check(const Grid& g, const LineFunction& v, const Symbol& a,
                                  const CommutatorOptions& options = {});

struct EgorovOptions {
  double tau = 1.0;
  double x0 = 1.0;
  double p0 = 0.0;
  int surface = 0;
  std::vector<double> masses{1e2, 1e3, 1e4};
  double lo = -4.0;
  double hi = 4.0;
  int min_points = 64;
  int max_points = kMaxDensePoints;
  LineFunction observable = [](double x) { return x; };
  int wigner_nodes = 12;
  int classical_steps = 4000;
  /// 1 for a single packet, 16 for a Gibbs-weighted 4 x 4 set of packet centres.
  int packets = 1;
  double packet_temperature = 0.05;
  double slope_threshold = -0.8;
  int table_points = 2048;
  int workers = 1;
  NonlinearEigenOptions eigen;
};

struct EgorovPoint {
  double mass = 0.0;
  double hbar = 0.0;
  int n_points = 0;
  double dt = 0.0;
  long steps = 0;
  double quantum = 0.0;
  double classical = 0.0;
  double error = 0.0;
  double propagation_error = 0.0;
  double norm_drift = 0.0;
  double off_surface = 0.0;
};

struct EgorovReport {
  std::vector<EgorovPoint> points;
  double slope = 0.0;
  double slope_threshold = 0.0;
  bool passed = false;
  /// Every error is within ten propagation-error estimates.
  bool within_propagation_tolerance = false;
};

EgorovReport egorov_test(const LineModel& model, const EgorovOptions& options);

nlohmann::json commutator_report_json(const CommutatorReport& r);
nlohmann::json egorov_report_json(const EgorovReport& r);

}  // namespace qcons::quantum
