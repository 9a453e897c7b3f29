#include "replica_mud/gauss_quad.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "replica_mud/errors.hpp"

namespace rmud {
namespace {

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
// polynomials, He_{k+1} = x He_k - k He_{k-1}: zero diagonal, off-diagonal
// sqrt(k).  The measure has unit mass, so w_i = v_i(0)^2.
QuadratureRule build_rule(std::size_t order) {
  const auto n = static_cast<Eigen::Index>(order);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    sub[k] = std::sqrt(static_cast<double>(k + 1));
  }

  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 1.0;
    return rule;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericFailure("Gauss-Hermite eigenproblem did not converge");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }

  // Enforce exact symmetry; the eigensolver leaves ~1e-15 asymmetry.
  for (std::size_t i = 0; i < order / 2; ++i) {
    const std::size_t j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;

  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

// Same construction for Legendre: off-diagonal k / sqrt(4k^2 - 1), measure
// of mass 2 on [-1, 1].
QuadratureRule build_legendre(std::size_t order) {
  const auto n = static_cast<Eigen::Index>(order);
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 2.0);
  if (n == 1) return rule;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    sub[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericFailure("Gauss-Legendre eigenproblem did not converge");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = 2.0 * v0 * v0;
  }
  for (std::size_t i = 0; i < order / 2; ++i) {
    const std::size_t j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

constexpr double kZMax = 10.0;

// Panels for E{f(sqrt(F) z + E)} with f built from tanh.  The poles of tanh
// sit on Re x = 0, i.e. at z0 = -E / sqrt(F).  Within |x| <= 4 panels are one
// unit of x wide; further out they widen to half the distance from z0 (so
// the poles stay far outside every panel's Bernstein ellipse), and never
// exceed 0.5 in z for the Gaussian factor.
std::vector<double> resolved_breaks(double E, double F) {
  const double s = std::sqrt(F);
  const double z0 = s > 0.0 ? -E / s : -std::copysign(1e300, E);
  auto width = [&](double b) {
    if (s == 0.0) return 0.5;
    const double x = s * std::fabs(b - z0);
    return std::min(0.5, std::max(1.0, 0.5 * x) / s);
  };
  const double zc = std::clamp(z0, -kZMax, kZMax);
  std::vector<double> breaks{zc};
  for (double b = zc; b < kZMax;) {
    b = std::min(kZMax, b + width(b));
    breaks.push_back(b);
  }
  std::vector<double> left;
  for (double b = zc; b > -kZMax;) {
    b = std::max(-kZMax, b - width(b));
    left.push_back(b);
  }
  breaks.insert(breaks.begin(), left.rbegin(), left.rend());
  return breaks;
}

template <typename Fn>
void for_each_resolved_node(double E, double F, std::size_t panel_order,
                            Fn&& fn) {
  if (!(F >= 0.0) || !std::isfinite(F) || !std::isfinite(E)) {
    throw InvalidArgument("resolved_expect: need finite E and finite F >= 0");
  }
  const auto& gl = legendre_rule(panel_order);
  const auto breaks = resolved_breaks(E, F);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double h = breaks[p + 1] - breaks[p];
    const double mid = 0.5 * (breaks[p] + breaks[p + 1]);
    for (std::size_t i = 0; i < gl.order; ++i) {
      const double z = mid + 0.5 * h * gl.nodes[i];
      fn(z, 0.5 * h * gl.weights[i] * inv_sqrt_2pi * std::exp(-0.5 * z * z));
    }
  }
}

}  // namespace

const QuadratureRule& legendre_rule(std::size_t order) {
  if (order == 0) throw InvalidArgument("quadrature order must be >= 1");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<const QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<const QuadratureRule>(build_legendre(order));
  return *slot;
}

double resolved_expect(Integrand kind, double E, double F,
                       std::size_t panel_order) {
  const double s = std::sqrt(F);
  double acc = 0.0;
  double mass = 0.0;
  for_each_resolved_node(E, F, panel_order, [&](double z, double w) {
    const double x = s * z + E;
    double f = 0.0;
    switch (kind) {
      case Integrand::kTanh:
        f = std::tanh(x);
        break;
      case Integrand::kTanhSq: {
        const double t = std::tanh(x);
        f = t * t;
        break;
      }
      case Integrand::kLogCosh:
        f = log_cosh(x);
        break;
    }
    acc += w * f;
    mass += w;
  });
  return acc / mass;
}

TanhMoments resolved_tanh_moments(double E, double F, std::size_t panel_order) {
  const double s = std::sqrt(F);
  double m = 0.0;
  double q = 0.0;
  double c = 0.0;
  double mass = 0.0;
  for_each_resolved_node(E, F, panel_order, [&](double z, double w) {
    const double x = s * z + E;
    const double t = std::tanh(x);
    const double e = std::exp(-2.0 * std::fabs(x));
    m += w * t;
    q += w * t * t;
    c += w * 4.0 * e / ((1.0 + e) * (1.0 + e));
    mass += w;
  });
  return {m / mass, q / mass, c / mass};
}

const QuadratureRule& cached_rule(std::size_t order) {
  if (order == 0) throw InvalidArgument("quadrature order must be >= 1");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<const QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<const QuadratureRule>(build_rule(order));
  return *slot;
}

QuadratureRule make_rule(std::size_t order) { return cached_rule(order); }

double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double gauss_expect(const QuadratureRule& rule, Integrand kind, double E,
                    double F) {
  if (!(F >= 0.0)) throw InvalidArgument("gauss_expect: F must be >= 0");
  if (rule.nodes.empty() || rule.nodes.size() != rule.weights.size()) {
    throw InvalidArgument("gauss_expect: malformed quadrature rule");
  }
  const double s = std::sqrt(F);
  double acc = 0.0;
  switch (kind) {
    case Integrand::kTanh:
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * std::tanh(s * rule.nodes[i] + E);
      }
      break;
    case Integrand::kTanhSq:
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = std::tanh(s * rule.nodes[i] + E);
        acc += rule.weights[i] * t * t;
      }
      break;
    case Integrand::kLogCosh:
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * log_cosh(s * rule.nodes[i] + E);
      }
      break;
  }
  return acc;
}

TanhMoments tanh_moments(const QuadratureRule& rule, double E, double F) {
  if (!(F >= 0.0)) throw InvalidArgument("tanh_moments: F must be >= 0");
  const double s = std::sqrt(F);
  double m = 0.0;
  double q = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = s * rule.nodes[i] + E;
    const double t = std::tanh(x);
    const double e = std::exp(-2.0 * std::fabs(x));
    m += rule.weights[i] * t;
    q += rule.weights[i] * t * t;
    c += rule.weights[i] * 4.0 * e / ((1.0 + e) * (1.0 + e));
  }
  return {m, q, c};
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace rmud
