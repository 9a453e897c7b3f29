#pragma once

#include <cstddef>
#include <vector>

namespace rmud {

/// Gauss-Hermite rule normalised to the standard normal measure Dz, so that
/// sum_i weights[i] * f(nodes[i]) approximates E{f(z)} for z ~ N(0, 1).
struct QuadratureRule {
  std::size_t order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr std::size_t kDefaultQuadOrder = 61;

/// Builds (or fetches from the process-wide cache) the rule of the given
/// order.  Exact for polynomials up to degree 2*order-1.  Throws
/// InvalidArgument for order 0.
QuadratureRule make_rule(std::size_t order);

/// Shared cached instance; the reference stays valid for the process lifetime.
const QuadratureRule& cached_rule(std::size_t order);

enum class Integrand { kTanh, kTanhSq, kLogCosh };

/// E{f(sqrt(F) z + E)} with z ~ N(0, 1).  F must be nonnegative.
double gauss_expect(const QuadratureRule& rule, Integrand kind, double E,
                    double F);

/// log(cosh(x)) without overflow for large |x|.
double log_cosh(double x);

/// Both tanh moments in one pass over the nodes.
struct TanhMoments {
  double mean;
  double mean_sq;
  double mean_sech_sq = 0.0;  // 1 - mean_sq without cancellation
};
TanhMoments tanh_moments(const QuadratureRule& rule, double E, double F);

/// Gauss-Legendre rule on [-1, 1] (weights sum to 2), cached like
/// cached_rule.
const QuadratureRule& legendre_rule(std::size_t order);

/// Nodes per panel of the composite rule below.
inline constexpr std::size_t kDefaultPanelOrder = 12;

/// Composite Gauss-Legendre evaluation of E{f(sqrt(F) z + E)} over
/// |z| <= 10.  A single Hermite rule converges slowly here because tanh has
/// poles at distance pi/2 from the real axis, i.e. pi/(2 sqrt(F)) in z.  The
/// panels are one unit of the argument wide near the pole line and widen
/// geometrically away from it, giving ~1e-15 accuracy at 12 nodes per panel
/// with at most a few hundred panels for any F.
double resolved_expect(Integrand kind, double E, double F,
                       std::size_t panel_order = kDefaultPanelOrder);
TanhMoments resolved_tanh_moments(double E, double F,
                                  std::size_t panel_order = kDefaultPanelOrder);

/// Complementary standard normal CDF.
double q_function(double x);

}  // namespace rmud
