#include "qcons/quadrature.hpp"

#include "qcons/types.hpp"

#include <cmath>
#include <numbers>

namespace qcons::quadrature {

namespace {

// Nodes are eigenvalues of the symmetric Jacobi matrix; weights are mu0 * v0^2.
Rule golub_welsch(const Vec& off_diagonal, double mu0) {
  const int n = static_cast<int>(off_diagonal.size()) + 1;
  Mat jacobi = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = jacobi(i + 1, i) = off_diagonal[i];
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()[i];
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  // Symmetrize: the rules are exactly symmetric about zero.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

Rule gauss_legendre(int n) {
  Vec beta(n - 1);
  for (int k = 1; k < n; ++k) {
    beta[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  }
  return golub_welsch(beta, 2.0);
}

Rule gauss_hermite(int n) {
  Vec beta(n - 1);
  for (int k = 1; k < n; ++k) {
    beta[k - 1] = std::sqrt(0.5 * k);
  }
  return golub_welsch(beta, std::sqrt(std::numbers::pi));
}

const Rule& gauss_legendre_16() {
  static const Rule rule = gauss_legendre(16);
  return rule;
}

}  // namespace qcons::quadrature
