#include "qcons/mollifier.hpp"

#include "qcons/errors.hpp"
#include "qcons/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace qcons {

namespace {

// int_0^1 exp(-1/(1-t^2)) t^2 dt, composite 16-point Gauss-Legendre on 64 panels.
double radial_bump_moment() {
  const auto& rule = quadrature::gauss_legendre_16();
  constexpr int kPanels = 64;
  double sum = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = static_cast<double>(p) / kPanels;
    const double half = 0.5 / kPanels;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = lo + half * (rule.nodes[i] + 1.0);
      sum += half * rule.weights[i] * std::exp(-1.0 / (1.0 - t * t)) * t * t;
    }
  }
  return sum;
}

struct Accum {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();
};

}  // namespace

Mollifier::Mollifier(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidParameterError("mollifier epsilon must be positive");
  }
  static const double moment = radial_bump_moment();
  normalization_ = 1.0 / (4.0 * std::numbers::pi * moment);
  prefactor_ = normalization_ / (epsilon_ * epsilon_ * epsilon_);
}

double Mollifier::eval(const Vec3& y) const {
  const double t = y.squaredNorm() / (epsilon_ * epsilon_);
  if (t >= 1.0) return 0.0;
  return prefactor_ * std::exp(-1.0 / (1.0 - t));
}

Vec3 Mollifier::grad(const Vec3& y) const {
  const double eps2 = epsilon_ * epsilon_;
  const double t = y.squaredNorm() / eps2;
  if (t >= 1.0) return Vec3::Zero();
  const double g = 1.0 - t;
  const double value = prefactor_ * std::exp(-1.0 / g);
  return (-2.0 * value / (g * g * eps2)) * y;
}

Mollifier::BondValue Mollifier::bond(const Vec3& y, const Vec3& a, const Vec3& b) const {
  // Points on the segment: y - b - s (a - b).
  const Vec3 c = y - b;
  const Vec3 d = a - b;
  const double dd = d.squaredNorm();
  if (dd == 0.0) {
    return {eval(c), grad(c)};
  }
  const double cd = c.dot(d);
  const double disc = cd * cd - dd * (c.squaredNorm() - epsilon_ * epsilon_);
  if (disc <= 0.0) return {};
  const double root = std::sqrt(disc);
  const double s_lo = std::max(0.0, (cd - root) / dd);
  const double s_hi = std::min(1.0, (cd + root) / dd);
  if (s_hi <= s_lo) return {};

  const auto& rule = quadrature::gauss_legendre_16();
  auto panel = [&](double lo, double hi) {
    Accum acc;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const Vec3 z = c - (mid + half * rule.nodes[i]) * d;
      const double w = half * rule.weights[i];
      acc.value += w * eval(z);
      acc.grad += w * grad(z);
    }
    return acc;
  };
  auto error = [&](const Accum& whole, const Accum& split) {
    return std::max(std::abs(whole.value - split.value),
                    epsilon_ * (whole.grad - split.grad).cwiseAbs().maxCoeff());
  };

  struct Interval {
    double lo, hi;
    Accum whole;
    int depth;
  };
  Accum total;
  // Depth-first with an explicit stack; left halves are processed first so the
  // summation order is deterministic.
  std::vector<Interval> stack{{s_lo, s_hi, panel(s_lo, s_hi), 0}};
  while (!stack.empty()) {
    Interval iv = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (iv.lo + iv.hi);
    const Accum left = panel(iv.lo, mid);
    const Accum right = panel(mid, iv.hi);
    Accum split{left.value + right.value, left.grad + right.grad};
    const double share = (iv.hi - iv.lo) / (s_hi - s_lo);
    if (error(iv.whole, split) <= kBondTolerance * share || iv.depth >= 40) {
      total.value += split.value;
      total.grad += split.grad;
    } else {
      stack.push_back({mid, iv.hi, right, iv.depth + 1});
      stack.push_back({iv.lo, mid, left, iv.depth + 1});
    }
  }
  return {total.value, total.grad};
}

}  // namespace qcons
