#include "qcons/surface.hpp"

#include "qcons/errors.hpp"

namespace qcons {

Vec Surface::gradient(const Vec& x) const { return finite_difference_gradient(*this, x); }

Mat Surface::partition_gradient(const Vec& x) const { return finite_difference_partition_gradient(*this, x); }

Vec finite_difference_gradient(const Surface& s, const Vec& x, double h) {
  Vec g(x.size());
  Vec y = x;
  for (int i = 0; i < x.size(); ++i) {
    y(i) = x(i) + h;
    const double ep = s.energy(y);
    y(i) = x(i) - h;
    const double em = s.energy(y);
    y(i) = x(i);
    g(i) = (ep - em) / (2.0 * h);
  }
  return g;
}

Mat finite_difference_partition_gradient(const Surface& s, const Vec& x, double h) {
  Mat g(s.particles(), x.size());
  Vec y = x;
  for (int i = 0; i < x.size(); ++i) {
    y(i) = x(i) + h;
    const Vec pp = s.partition(y);
    y(i) = x(i) - h;
    const Vec pm = s.partition(y);
    y(i) = x(i);
    g.col(i) = (pp - pm) / (2.0 * h);
  }
  return g;
}

FreeSurface::FreeSurface(int n_particles) : n_(n_particles) {
  if (n_particles < 0) throw InvalidParameterError("particle count must be nonnegative");
}

HarmonicWellSurface::HarmonicWellSurface(int n_particles, double kappa, const Vec3& center, double offset,
                                         int index)
    : n_(n_particles), kappa_(kappa), center_(center), offset_(offset), index_(index) {
  if (n_particles < 0 || !(kappa >= 0.0)) throw InvalidParameterError("invalid harmonic well");
}

double HarmonicWellSurface::energy(const Vec& x) const { return partition(x).sum(); }

Vec HarmonicWellSurface::gradient(const Vec& x) const {
  Vec g(x.size());
  for (int n = 0; n < n_; ++n) g.segment<3>(3 * n) = kappa_ * (x.segment<3>(3 * n) - center_);
  return g;
}

Vec HarmonicWellSurface::partition(const Vec& x) const {
  Vec p(n_);
  for (int n = 0; n < n_; ++n) p(n) = offset_ + 0.5 * kappa_ * (x.segment<3>(3 * n) - center_).squaredNorm();
  return p;
}

Mat HarmonicWellSurface::partition_gradient(const Vec& x) const {
  Mat g = Mat::Zero(n_, x.size());
  for (int n = 0; n < n_; ++n) g.block<1, 3>(n, 3 * n) = kappa_ * (x.segment<3>(3 * n) - center_).transpose();
  return g;
}

AdiabaticSurface::AdiabaticSurface(PotentialPtr v, int j) : v_(std::move(v)), j_(j) {
  if (!v_) throw InvalidParameterError("null potential");
  if (j < 0 || j >= v_->dim()) throw InvalidParameterError("surface index out of range");
}

double AdiabaticSurface::energy(const Vec& x) const { return eigendecompose(v_->eval(x)).lambdas(j_); }

Vec AdiabaticSurface::gradient(const Vec& x) const {
  return surface_gradient(*v_, x, eigendecompose(v_->eval(x)), j_);
}

Vec AdiabaticSurface::partition(const Vec& x) const {
  return surface_partition(*v_, x, eigendecompose(v_->eval(x))).col(j_);
}

Mat AdiabaticSurface::partition_gradient(const Vec& x) const {
  return partition_gradients(*v_, x, eigendecompose(v_->eval(x)), j_);
}

CorrectedSurface::CorrectedSurface(PotentialPtr v, int j, double mass, NonlinearEigenOptions options)
    : v_(std::move(v)), j_(j), mass_(mass), options_(options) {
  if (!v_) throw InvalidParameterError("null potential");
  if (j < 0 || j >= v_->dim()) throw InvalidParameterError("surface index out of range");
  if (!(mass >= options.mass_min)) throw InvalidParameterError("mass below the solvability guard");
}

double CorrectedSurface::energy(const Vec& x) const { return partition(x).sum(); }

Vec CorrectedSurface::gradient(const Vec& x) const { return partition_gradient(x).colwise().sum().transpose(); }

Vec CorrectedSurface::partition(const Vec& x) const {
  return solve_nonlinear_eigen(*v_, x, mass_, options_).per_particle_bar.col(j_);
}

Mat CorrectedSurface::partition_gradient(const Vec& x) const {
  return finite_difference_partition_gradient(*this, x);
}

}  // namespace qcons
