#include "qcons/potential.hpp"

#include "qcons/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace qcons {

std::vector<CMat> MatrixPotential::eval_gradient(const Vec& x) const {
  std::vector<CMat> out;
  out.reserve(x.size());
  for (int i = 0; i < x.size(); ++i) out.push_back(eval_deriv(x, i));
  return out;
}

std::vector<CMat> MatrixPotential::eval_part_gradient(const Vec& x, int n) const {
  std::vector<CMat> out;
  out.reserve(x.size());
  for (int i = 0; i < x.size(); ++i) out.push_back(eval_part_deriv(x, n, i));
  return out;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameterError(what);
}

void validate(const PairFunction::Term& t) {
  const auto& p = t.params;
  for (double v : p) require(std::isfinite(v), "pair function parameter must be finite");
  switch (t.kind) {
    case PairFunction::Kind::Constant:
      require(p.size() == 1, "constant term takes 1 parameter");
      break;
    case PairFunction::Kind::Harmonic:
      require(p.size() == 2, "harmonic term takes kappa, r0");
      require(p[0] >= 0.0 && p[1] >= 0.0, "harmonic kappa and r0 must be nonnegative");
      break;
    case PairFunction::Kind::Morse:
      require(p.size() == 3, "Morse term takes D, a, r0");
      require(p[0] > 0.0 && p[1] > 0.0 && p[2] > 0.0, "Morse D, a, r0 must be positive");
      break;
    case PairFunction::Kind::LennardJones:
      require(p.size() == 3, "Lennard-Jones term takes epsilon, sigma, r_inner");
      require(p[0] > 0.0 && p[1] > 0.0 && p[2] > 0.0,
              "Lennard-Jones epsilon, sigma, r_inner must be positive");
      break;
    case PairFunction::Kind::Gaussian:
      require(p.size() == 3, "Gaussian term takes amplitude, center, width");
      require(p[2] > 0.0, "Gaussian width must be positive");
      break;
  }
}

// Lennard-Jones value and first two derivatives.
struct Lj {
  double f, d1, d2;
};

Lj lj(double eps, double sigma, double r) {
  const double s6 = std::pow(sigma / r, 6);
  const double s12 = s6 * s6;
  return {4.0 * eps * (s12 - s6), 4.0 * eps * (-12.0 * s12 + 6.0 * s6) / r,
          4.0 * eps * (156.0 * s12 - 42.0 * s6) / (r * r)};
}

double term_value(const PairFunction::Term& t, double r) {
  const auto& p = t.params;
  switch (t.kind) {
    case PairFunction::Kind::Constant:
      return p[0];
    case PairFunction::Kind::Harmonic:
      return 0.5 * p[0] * (r - p[1]) * (r - p[1]);
    case PairFunction::Kind::Morse: {
      const double e = 1.0 - std::exp(-p[1] * (r - p[2]));
      return p[0] * e * e - p[0];
    }
    case PairFunction::Kind::LennardJones: {
      if (r >= p[2]) return lj(p[0], p[1], r).f;
      const Lj a = lj(p[0], p[1], p[2]);
      const double dr = r - p[2];
      return a.f + a.d1 * dr + 0.5 * a.d2 * dr * dr;
    }
    case PairFunction::Kind::Gaussian: {
      const double z = (r - p[1]) / p[2];
      return p[0] * std::exp(-z * z);
    }
  }
  return 0.0;
}

double term_deriv(const PairFunction::Term& t, double r) {
  const auto& p = t.params;
  switch (t.kind) {
    case PairFunction::Kind::Constant:
      return 0.0;
    case PairFunction::Kind::Harmonic:
      return p[0] * (r - p[1]);
    case PairFunction::Kind::Morse: {
      const double x = std::exp(-p[1] * (r - p[2]));
      return 2.0 * p[0] * p[1] * (1.0 - x) * x;
    }
    case PairFunction::Kind::LennardJones: {
      if (r >= p[2]) return lj(p[0], p[1], r).d1;
      const Lj a = lj(p[0], p[1], p[2]);
      return a.d1 + a.d2 * (r - p[2]);
    }
    case PairFunction::Kind::Gaussian: {
      const double z = (r - p[1]) / p[2];
      return -2.0 * z / p[2] * p[0] * std::exp(-z * z);
    }
  }
  return 0.0;
}

}  // namespace

PairFunction::PairFunction(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) validate(t);
}

PairFunction PairFunction::constant(double c) { return PairFunction({{Kind::Constant, {c}}}); }
PairFunction PairFunction::harmonic(double kappa, double r0) {
  return PairFunction({{Kind::Harmonic, {kappa, r0}}});
}
PairFunction PairFunction::morse(double depth, double width, double r0) {
  return PairFunction({{Kind::Morse, {depth, width, r0}}});
}
PairFunction PairFunction::lennard_jones(double epsilon, double sigma, double r_inner) {
  return PairFunction({{Kind::LennardJones, {epsilon, sigma, r_inner}}});
}
PairFunction PairFunction::gaussian(double amplitude, double center, double width) {
  return PairFunction({{Kind::Gaussian, {amplitude, center, width}}});
}

PairFunction PairFunction::operator+(const PairFunction& other) const {
  std::vector<Term> all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return PairFunction(std::move(all));
}

double PairFunction::value(double r) const {
  double s = 0.0;
  for (const auto& t : terms_) s += term_value(t, r);
  return s;
}

double PairFunction::deriv(double r) const {
  double s = 0.0;
  for (const auto& t : terms_) s += term_deriv(t, r);
  return s;
}

double PairFunction::lower_bound() const {
  double s = 0.0;
  for (const auto& t : terms_) {
    if (t.kind == Kind::Constant)
      s += t.params[0];
    else if (t.kind == Kind::Gaussian)
      s += std::min(0.0, t.params[0]);
    else
      return -std::numeric_limits<double>::infinity();
  }
  return s;
}

PairMatrixPotential::PairMatrixPotential(int n_particles, int dim, std::vector<PairFunction> entries)
    : n_particles_(n_particles), dim_(dim), entries_(std::move(entries)) {
  require(n_particles >= 1, "particle count must be positive");
  require(dim >= 1, "electronic dimension must be positive");
  require(static_cast<int>(entries_.size()) == dim * dim, "pair matrix needs d*d entries");
}

CMat PairMatrixPotential::pair_value(double r) const {
  CMat m(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = a; b < dim_; ++b) m(a, b) = m(b, a) = entry(a, b).value(r);
  return m;
}

CMat PairMatrixPotential::pair_deriv(double r) const {
  CMat m(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = a; b < dim_; ++b) m(a, b) = m(b, a) = entry(a, b).deriv(r);
  return m;
}

namespace {

Vec3 separation(const Vec& x, int n, int k) { return x.segment<3>(3 * n) - x.segment<3>(3 * k); }

void check_size(const Vec& x, int n_particles) {
  if (x.size() != 3 * n_particles)
    throw InvalidParameterError("configuration length does not match particle count");
}

Vec3 unit(const Vec3& d, double r) {
  if (!(r > 0.0)) throw CoincidentPointsError("coincident particles in pair potential");
  return d / r;
}

}  // namespace

CMat PairMatrixPotential::eval(const Vec& x) const {
  check_size(x, n_particles_);
  CMat v = CMat::Zero(dim_, dim_);
  for (int n = 0; n < n_particles_; ++n)
    for (int k = n + 1; k < n_particles_; ++k) v += pair_value(separation(x, n, k).norm());
  return v;
}

CMat PairMatrixPotential::eval_part(const Vec& x, int n) const {
  check_size(x, n_particles_);
  CMat v = CMat::Zero(dim_, dim_);
  for (int k = 0; k < n_particles_; ++k)
    if (k != n) v += 0.5 * pair_value(separation(x, n, k).norm());
  return v;
}

CMat PairMatrixPotential::eval_deriv(const Vec& x, int i) const {
  check_size(x, n_particles_);
  const int n = i / 3, c = i % 3;
  CMat v = CMat::Zero(dim_, dim_);
  for (int k = 0; k < n_particles_; ++k) {
    if (k == n) continue;
    const Vec3 d = separation(x, n, k);
    const double r = d.norm();
    v += pair_deriv(r) * unit(d, r)(c);
  }
  return v;
}

CMat PairMatrixPotential::eval_part_deriv(const Vec& x, int n, int i) const {
  check_size(x, n_particles_);
  const int m = i / 3, c = i % 3;
  CMat v = CMat::Zero(dim_, dim_);
  if (m == n) {
    for (int k = 0; k < n_particles_; ++k) {
      if (k == n) continue;
      const Vec3 d = separation(x, n, k);
      const double r = d.norm();
      v += 0.5 * pair_deriv(r) * unit(d, r)(c);
    }
  } else {
    const Vec3 d = separation(x, m, n);
    const double r = d.norm();
    v += 0.5 * pair_deriv(r) * unit(d, r)(c);
  }
  return v;
}

std::vector<CMat> PairMatrixPotential::eval_gradient(const Vec& x) const {
  check_size(x, n_particles_);
  std::vector<CMat> g(3 * n_particles_, CMat::Zero(dim_, dim_));
  for (int n = 0; n < n_particles_; ++n)
    for (int k = n + 1; k < n_particles_; ++k) {
      const Vec3 d = separation(x, n, k);
      const double r = d.norm();
      const Vec3 e = unit(d, r);
      const CMat f = pair_deriv(r);
      for (int c = 0; c < 3; ++c) {
        g[3 * n + c] += f * e(c);
        g[3 * k + c] -= f * e(c);
      }
    }
  return g;
}

std::vector<CMat> PairMatrixPotential::eval_part_gradient(const Vec& x, int n) const {
  check_size(x, n_particles_);
  std::vector<CMat> g(3 * n_particles_, CMat::Zero(dim_, dim_));
  for (int k = 0; k < n_particles_; ++k) {
    if (k == n) continue;
    const Vec3 d = separation(x, n, k);
    const double r = d.norm();
    const Vec3 e = unit(d, r);
    const CMat f = 0.5 * pair_deriv(r);
    for (int c = 0; c < 3; ++c) {
      g[3 * n + c] += f * e(c);
      g[3 * k + c] -= f * e(c);
    }
  }
  return g;
}

std::shared_ptr<PairMatrixPotential> make_scalar_pair_model(int n_particles, PairFunction phi) {
  return std::make_shared<PairMatrixPotential>(n_particles, 1, std::vector<PairFunction>{std::move(phi)});
}

std::shared_ptr<PairMatrixPotential> make_two_state_model(int n_particles, const TwoStateParams& params) {
  for (const auto& t : params.gap.terms())
    require(t.kind == PairFunction::Kind::Constant || t.kind == PairFunction::Kind::Gaussian,
            "gap profile accepts constant and Gaussian terms only");
  require(params.gap.lower_bound() > 0.0, "guaranteed minimum gap must be positive");
  require(n_particles >= 2, "two-state model needs at least one pair");
  require(params.coupling_width > 0.0, "coupling width must be positive");
  PairFunction coupling;
  if (params.coupling_strength != 0.0)
    coupling = PairFunction::gaussian(params.coupling_strength, params.coupling_center,
                                      params.coupling_width);
  std::vector<PairFunction> e{params.phi1, coupling, coupling, params.phi1 + params.gap};
  return std::make_shared<PairMatrixPotential>(n_particles, 2, std::move(e));
}

EigenData eigendecompose(const CMat& v) {
  if (v.rows() < 1 || v.rows() != v.cols())
    throw InvalidParameterError("eigendecompose needs a nonempty square matrix");
  if (!v.allFinite()) throw InvalidParameterError("matrix has non-finite entries");
  const CMat h = 0.5 * (v + v.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  if (es.info() != Eigen::Success) throw DegenerateSpectrumError("eigensolver failed");
  EigenData out;
  out.lambdas = es.eigenvalues();
  out.psi = es.eigenvectors();
  const int d = static_cast<int>(v.rows());
  out.gap_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < d; ++k) out.gap_min = std::min(out.gap_min, out.lambdas(k + 1) - out.lambdas(k));
  if (out.gap_min < kGapTolerance) throw DegenerateSpectrumError("adjacent eigenvalues closer than 1e-10");
  for (int k = 0; k < d; ++k) {
    Eigen::Index imax = 0;
    out.psi.col(k).cwiseAbs().maxCoeff(&imax);
    const Complex z = out.psi(imax, k);
    out.psi.col(k) *= std::conj(z) / std::abs(z);
    out.psi(imax, k) = std::abs(out.psi(imax, k));
  }
  return out;
}

void align_phases(EigenData& eig, const CMat& reference) {
  for (int k = 0; k < eig.psi.cols(); ++k) {
    const Complex s = reference.col(k).dot(eig.psi.col(k));
    if (std::abs(s) > 0.0) eig.psi.col(k) *= std::conj(s) / std::abs(s);
  }
}

Mat surface_partition(const MatrixPotential& v, const Vec& x, const EigenData& eig) {
  const int n_particles = v.particles(), d = v.dim();
  Mat out(n_particles, d);
  for (int n = 0; n < n_particles; ++n) {
    const CMat vn = v.eval_part(x, n);
    for (int k = 0; k < d; ++k) out(n, k) = eig.psi.col(k).dot(vn * eig.psi.col(k)).real();
  }
  return out;
}

CMat eigenvector_derivative(const EigenData& eig, const CMat& dv) {
  const int d = static_cast<int>(eig.psi.cols());
  const CMat b = eig.psi.adjoint() * dv * eig.psi;
  CMat coef = CMat::Zero(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      if (l == k) continue;
      const double gap = eig.lambdas(k) - eig.lambdas(l);
      if (std::abs(gap) < kGapTolerance) throw DegenerateSpectrumError("degenerate eigenvalues");
      coef(l, k) = b(l, k) / gap;
    }
  return eig.psi * coef;
}

CMat eigenvector_derivative(const MatrixPotential& v, const Vec& x, const EigenData& eig, int i) {
  return eigenvector_derivative(eig, v.eval_deriv(x, i));
}

Vec surface_gradient(const MatrixPotential& v, const Vec& x, const EigenData& eig, int k) {
  const auto dv = v.eval_gradient(x);
  Vec g(dv.size());
  for (std::size_t i = 0; i < dv.size(); ++i) g(i) = eig.psi.col(k).dot(dv[i] * eig.psi.col(k)).real();
  return g;
}

Vec per_particle_gradient(const MatrixPotential& v, const Vec& x, const EigenData& eig, int k, int n) {
  return partition_gradients(v, x, eig, k).row(n).transpose();
}

Mat partition_gradients(const MatrixPotential& v, const Vec& x, const EigenData& eig, int k) {
  const int n_particles = v.particles();
  const int n_coords = 3 * n_particles;
  const auto dv = v.eval_gradient(x);
  const CVec psi = eig.psi.col(k);
  std::vector<CVec> dpsi(n_coords);
  for (int i = 0; i < n_coords; ++i) dpsi[i] = eigenvector_derivative(eig, dv[i]).col(k);
  Mat out(n_particles, n_coords);
  for (int n = 0; n < n_particles; ++n) {
    const CMat vn = v.eval_part(x, n);
    const CVec vpsi = vn * psi;
    const auto dvn = v.eval_part_gradient(x, n);
    for (int i = 0; i < n_coords; ++i)
      out(n, i) = 2.0 * dpsi[i].dot(vpsi).real() + psi.dot(dvn[i] * psi).real();
  }
  return out;
}

}  // namespace qcons
