#include "qcons/nonlinear_eigen.hpp"

#include "qcons/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qcons {

namespace {

// d Psi_k = sum_{l != k} Psi_l (Psi_l^* dV Psi_k) / (lambda_k - lambda_l), for every coordinate.
std::vector<CMat> derivatives(const Vec& lambdas, const CMat& psi, const std::vector<CMat>& dv) {
  EigenData eig{lambdas, psi, 0.0};
  std::vector<CMat> out;
  out.reserve(dv.size());
  for (const auto& m : dv) out.push_back(eigenvector_derivative(eig, m));
  return out;
}

CMat gram(const std::vector<CMat>& dpsi, int begin, int end) {
  const int d = static_cast<int>(dpsi.front().cols());
  CMat g = CMat::Zero(d, d);
  for (int i = begin; i < end; ++i) g.noalias() += dpsi[i].adjoint() * dpsi[i];
  return g;
}

CMat correction(const Vec& lambdas, const CMat& psi, const std::vector<CMat>& dv) {
  const auto dpsi = derivatives(lambdas, psi, dv);
  return psi * gram(dpsi, 0, static_cast<int>(dpsi.size())) * psi.adjoint();
}

double max_gap_check(const Vec& lambdas) {
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < lambdas.size(); ++k) gap = std::min(gap, lambdas(k + 1) - lambdas(k));
  if (gap < kGapTolerance) throw DegenerateSpectrumError("corrected eigenvalues became degenerate");
  return gap;
}

struct State {
  Vec lambdas;
  CMat psi;
};

// Perturbation-theory velocity of the eigenpairs of V + eps B(eps) along eps,
// with B' estimated by a short inner iteration.
State velocity(const State& s, double eps, const std::vector<CMat>& dv) {
  const int d = static_cast<int>(s.psi.cols());
  const CMat b = correction(s.lambdas, s.psi, dv);
  CMat db = CMat::Zero(d, d);
  State vel;
  for (int pass = 0; pass < 4; ++pass) {
    const CMat rate = s.psi.adjoint() * (b + eps * db) * s.psi;
    vel.lambdas = rate.diagonal().real();
    CMat coef = CMat::Zero(d, d);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        if (l != k) coef(l, k) = rate(l, k) / (s.lambdas(k) - s.lambdas(l));
    vel.psi = s.psi * coef;
    if (eps == 0.0) break;
    const double h = 1e-6;
    db = (correction(s.lambdas + h * vel.lambdas, s.psi + h * vel.psi, dv) -
          correction(s.lambdas - h * vel.lambdas, s.psi - h * vel.psi, dv)) /
         (2.0 * h);
  }
  return vel;
}

State axpy(const State& s, double h, const State& v) { return {s.lambdas + h * v.lambdas, s.psi + h * v.psi}; }

}  // namespace

CorrectedSurfaces solve_nonlinear_eigen(const MatrixPotential& v, const Vec& x, double mass,
                                        const NonlinearEigenOptions& options) {
  if (!(mass >= options.mass_min))
    throw InvalidParameterError("mass " + std::to_string(mass) + " below the solvability guard " +
                                std::to_string(options.mass_min));
  const CMat v0 = v.eval(x);
  const auto dv = v.eval_gradient(x);
  const double vnorm = v0.norm();
  const double eps = 1.0 / (4.0 * mass);

  CorrectedSurfaces cs;
  cs.mass = mass;
  EigenData eig = eigendecompose(v0);

  if (options.mode == NonlinearEigenOptions::Mode::FixedPoint) {
    bool converged = false;
    for (int it = 1; it <= options.max_iter; ++it) {
      const CMat w = v0 + eps * correction(eig.lambdas, eig.psi, dv);
      EigenData next = eigendecompose(w);
      align_phases(next, eig.psi);
      const double change = (next.lambdas - eig.lambdas).cwiseAbs().maxCoeff();
      eig = std::move(next);
      cs.iterations = it;
      if (change <= options.tolerance * std::max(1.0, vnorm)) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NoConvergenceError("nonlinear eigenproblem did not converge in " +
                               std::to_string(options.max_iter) + " iterations");
    cs.lambdas_bar = eig.lambdas;
    cs.psi_bar = eig.psi;
  } else {
    State s{eig.lambdas, eig.psi};
    const int steps = options.continuation_steps;
    const double h = eps / steps;
    for (int k = 0; k < steps; ++k) {
      const double e0 = k * h;
      const State k1 = velocity(s, e0, dv);
      const State k2 = velocity(axpy(s, 0.5 * h, k1), e0 + 0.5 * h, dv);
      const State k3 = velocity(axpy(s, 0.5 * h, k2), e0 + 0.5 * h, dv);
      const State k4 = velocity(axpy(s, h, k3), e0 + h, dv);
      s.lambdas += h / 6.0 * (k1.lambdas + 2.0 * k2.lambdas + 2.0 * k3.lambdas + k4.lambdas);
      s.psi += h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
      max_gap_check(s.lambdas);
    }
    Eigen::HouseholderQR<CMat> qr(s.psi);
    CMat q = qr.householderQ() * CMat::Identity(s.psi.rows(), s.psi.cols());
    for (int k = 0; k < q.cols(); ++k) {
      const Complex ph = q.col(k).dot(s.psi.col(k));
      q.col(k) *= ph / std::abs(ph);
    }
    cs.lambdas_bar = s.lambdas;
    cs.psi_bar = q;
    cs.iterations = steps;
  }

  cs.dpsi = derivatives(cs.lambdas_bar, cs.psi_bar, dv);
  const CMat b = cs.psi_bar * gram(cs.dpsi, 0, static_cast<int>(cs.dpsi.size())) * cs.psi_bar.adjoint();
  cs.residual_norm =
      ((v0 + eps * b) * cs.psi_bar - cs.psi_bar * cs.lambdas_bar.asDiagonal()).norm();
  if (options.mode == NonlinearEigenOptions::Mode::FixedPoint &&
      cs.residual_norm > 1e-10 * std::max(vnorm, 1e-300))
    throw NoConvergenceError("nonlinear eigen residual " + std::to_string(cs.residual_norm) +
                             " exceeds 1e-10 |V|");
  cs.per_particle_bar = corrected_partition(cs, v, x, cs.dpsi);
  return cs;
}

Mat corrected_partition(const CorrectedSurfaces& cs, const MatrixPotential& v, const Vec& x) {
  return corrected_partition(cs, v, x, cs.dpsi);
}

Mat corrected_partition(const CorrectedSurfaces& cs, const MatrixPotential& v, const Vec& x,
                        const std::vector<CMat>& dpsi) {
  const int n_particles = v.particles(), d = v.dim();
  if (static_cast<int>(dpsi.size()) != 3 * n_particles)
    throw InvalidParameterError("need one eigenvector derivative per coordinate");
  const double eps = 1.0 / (4.0 * cs.mass);
  Mat out(n_particles, d);
  for (int n = 0; n < n_particles; ++n) {
    const CMat vn = v.eval_part(x, n);
    const CMat gn = gram(dpsi, 3 * n, 3 * n + 3);
    for (int k = 0; k < d; ++k) {
      const CVec psi = cs.psi_bar.col(k);
      out(n, k) = psi.dot(vn * psi).real() + eps * gn(k, k).real();
    }
  }
  return out;
}

}  // namespace qcons
