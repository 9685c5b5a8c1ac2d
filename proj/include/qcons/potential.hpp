#pragma once

#include "qcons/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace qcons {

/// Hermitian d x d potential V(x) over N particles with a per-particle split
/// V = sum_n V^n. Implementations are immutable evaluators.
class MatrixPotential {
public:
  virtual ~MatrixPotential() = default;

  virtual int dim() const = 0;
  virtual int particles() const = 0;

  virtual CMat eval(const Vec& x) const = 0;
  virtual CMat eval_part(const Vec& x, int n) const = 0;
  /// dV/dx_i for scalar coordinate i in [0, 3N).
  virtual CMat eval_deriv(const Vec& x, int i) const = 0;
  /// dV^n/dx_i.
  virtual CMat eval_part_deriv(const Vec& x, int n, int i) const = 0;

  /// All 3N coordinate derivatives at once; override when cheaper than the loop.
  virtual std::vector<CMat> eval_gradient(const Vec& x) const;
  /// All 3N coordinate derivatives of V^n.
  virtual std::vector<CMat> eval_part_gradient(const Vec& x, int n) const;
};

using PotentialPtr = std::shared_ptr<const MatrixPotential>;

/// Scalar function of a pair distance, built as a sum of elementary terms.
class PairFunction {
public:
  enum class Kind { Constant, Harmonic, Morse, LennardJones, Gaussian };

  struct Term {
    Kind kind = Kind::Constant;
    /// Constant: {c}; Harmonic: {kappa, r0}; Morse: {D, a, r0};
    /// LennardJones: {epsilon, sigma, r_inner}; Gaussian: {amplitude, center, width}.
    std::vector<double> params;
  };

  PairFunction() = default;
  /// Throws InvalidParameterError for malformed or nonpositive parameters.
  explicit PairFunction(std::vector<Term> terms);

  static PairFunction zero() { return PairFunction{}; }
  static PairFunction constant(double c);
  static PairFunction harmonic(double kappa, double r0);
  static PairFunction morse(double depth, double width, double r0);
  /// Lennard-Jones continued below r_inner by its second-order Taylor polynomial.
  static PairFunction lennard_jones(double epsilon, double sigma, double r_inner);
  static PairFunction gaussian(double amplitude, double center, double width);

  PairFunction operator+(const PairFunction& other) const;

  double value(double r) const;
  double deriv(double r) const;
  /// Lower bound of value(r) over r >= 0; only defined for Constant and Gaussian terms.
  double lower_bound() const;

  const std::vector<Term>& terms() const { return terms_; }

private:
  std::vector<Term> terms_;
};

/// V(x)_{ab} = sum over pairs of f_{ab}(r^{nk}), with V^n taking half of every pair term touching n.
class PairMatrixPotential : public MatrixPotential {
public:
  /// entries is d x d, row-major, symmetric.
  PairMatrixPotential(int n_particles, int dim, std::vector<PairFunction> entries);

  int dim() const override { return dim_; }
  int particles() const override { return n_particles_; }
  CMat eval(const Vec& x) const override;
  CMat eval_part(const Vec& x, int n) const override;
  CMat eval_deriv(const Vec& x, int i) const override;
  CMat eval_part_deriv(const Vec& x, int n, int i) const override;
  std::vector<CMat> eval_gradient(const Vec& x) const override;
  std::vector<CMat> eval_part_gradient(const Vec& x, int n) const override;

  const PairFunction& entry(int a, int b) const { return entries_[a * dim_ + b]; }

private:
  CMat pair_value(double r) const;
  CMat pair_deriv(double r) const;

  int n_particles_;
  int dim_;
  std::vector<PairFunction> entries_;
};

/// d = 1 model V = sum_{n<k} phi(r^{nk}).
std::shared_ptr<PairMatrixPotential> make_scalar_pair_model(int n_particles, PairFunction phi);

struct TwoStateParams {
  PairFunction phi1;
  PairFunction gap;  ///< phi2 = phi1 + gap; Constant and Gaussian terms only
  double coupling_strength = 0.0;  ///< c0
  double coupling_center = 1.0;    ///< r_c
  double coupling_width = 1.0;     ///< w
};

/// d = 2 model [[sum phi1, sum c], [sum c, sum phi2]] with c(r) = c0 exp(-(r - r_c)^2 / w^2).
/// Throws InvalidParameterError when the gap profile is not bounded below by a positive number.
std::shared_ptr<PairMatrixPotential> make_two_state_model(int n_particles, const TwoStateParams& params);

/// Eigen-decomposition with ascending eigenvalues and a deterministic phase convention.
struct EigenData {
  Vec lambdas;
  CMat psi;
  double gap_min = 0.0;
};

/// Minimum admissible adjacent eigenvalue gap.
inline constexpr double kGapTolerance = 1e-10;

/// Throws DegenerateSpectrumError when two adjacent eigenvalues are closer than kGapTolerance.
EigenData eigendecompose(const CMat& v);

/// Rotates each column phase to maximize overlap with reference (trajectory continuity).
void align_phases(EigenData& eig, const CMat& reference);

/// lambda_k^n = <Psi_k, V^n Psi_k>; N x d.
Mat surface_partition(const MatrixPotential& v, const Vec& x, const EigenData& eig);

/// d Psi / d x_i given dV/dx_i, from first-order perturbation theory (zero diagonal gauge).
CMat eigenvector_derivative(const EigenData& eig, const CMat& dv);

CMat eigenvector_derivative(const MatrixPotential& v, const Vec& x, const EigenData& eig, int i);

/// Hellmann-Feynman gradient of lambda_k.
Vec surface_gradient(const MatrixPotential& v, const Vec& x, const EigenData& eig, int k);

/// Gradient of lambda_k^n with respect to all 3N coordinates.
Vec per_particle_gradient(const MatrixPotential& v, const Vec& x, const EigenData& eig, int k, int n);

/// Rows n = gradient of lambda_k^n; N x 3N.
Mat partition_gradients(const MatrixPotential& v, const Vec& x, const EigenData& eig, int k);

}  // namespace qcons
