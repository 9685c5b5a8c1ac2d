#pragma once

#include <vector>

namespace qcons::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
Rule gauss_legendre(int n);

/// n-point Gauss-Hermite rule for weight exp(-t^2) on the real line (Golub-Welsch).
Rule gauss_hermite(int n);

/// Cached 16-point Gauss-Legendre rule.
const Rule& gauss_legendre_16();

}  // namespace qcons::quadrature
