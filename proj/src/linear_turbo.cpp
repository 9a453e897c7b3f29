#include "replica_mud/linear_turbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "replica_mud/errors.hpp"

namespace rmud {
namespace {

struct PriorMoments {
  double m;
  double q;
  double p;
};

// Gaussian-prior moments averaged over the joint (P, P_hat) law.
PriorMoments prior_update(const PowerDistribution& powers, double E, double F,
                          double G) {
  PriorMoments out{0.0, 0.0, 0.0};
  for (const auto& pt : powers.points()) {
    const double P = pt.p_true;
    const double Ph = pt.p_est;
    const double A = 1.0 + Ph * (F - G);
    out.m += pt.weight * P * Ph * E / A;
    out.q += pt.weight * Ph * Ph * (P * E * E + F) / (A * A);
    out.p += pt.weight * Ph * (Ph * P * E * E + 2.0 * Ph * F + 1.0 - Ph * G) /
             (A * A);
  }
  return out;
}

struct ConjugateTriple {
  double E;
  double F;
  double G;
};

ConjugateTriple channel_update(const ChannelCoupling& c, double m, double q,
                               double p) {
  const auto ef = conjugate_update(c, m, q, p);
  return {ef.E, ef.F, ef.F - (c.lambda / c.kappa) * ef.E};
}

std::vector<double> as_vector(const LinearReplicaState& s) {
  return {s.m, s.q, s.p, s.E, s.F, s.G};
}

void check_config(const SolverConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw InvalidArgument("tol must be > 0");
  if (cfg.max_iter <= 0) throw InvalidArgument("max_iter must be > 0");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
    throw InvalidArgument("damping must lie in (0, 1]");
  }
}

LinearReplicaState iterate_linear(const ChannelCoupling& c,
                                  const PowerDistribution& powers,
                                  const SolverConfig& cfg) {
  check_config(cfg);
  const double a = cfg.damping;
  LinearReplicaState s;
  s.m = cfg.init.m;
  s.q = cfg.init.q;
  s.p = 1.0;
  {
    const auto t = channel_update(c, s.m, s.q, s.p);
    s.E = t.E;
    s.F = t.F;
    s.G = t.G;
  }

  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iter; ++it) {
    const auto pm = prior_update(powers, s.E, s.F, s.G);
    const double dm = pm.m - s.m;
    const double dq = pm.q - s.q;
    const double dp = pm.p - s.p;
    s.m += a * dm;
    s.q += a * dq;
    s.p += a * dp;

    const auto t = channel_update(c, s.m, s.q, s.p);
    const double dE = t.E - s.E;
    const double dF = t.F - s.F;
    const double dG = t.G - s.G;
    s.E += a * dE;
    s.F += a * dF;
    s.G += a * dG;

    residual = std::max({std::fabs(dm), std::fabs(dq), std::fabs(dp),
                         std::fabs(dE), std::fabs(dF), std::fabs(dG)});
    if (!std::isfinite(residual)) break;
    if (residual < cfg.tol) return s;
  }
  std::ostringstream msg;
  msg << "linear replica iteration did not converge (residual " << residual
      << ")";
  throw ConvergenceFailure(msg.str(), as_vector(s), residual);
}

ChannelCoupling pic_coupling(const SystemParams& params,
                             const FeedbackModel& feedback) {
  if (!(feedback.delta_b2 > 0.0 && feedback.delta_b2 <= 1.0)) {
    throw InvalidArgument("delta_b2 must lie in (0, 1]");
  }
  SystemParams eff = params;
  eff.sigma_n2 = params.sigma_n2 / feedback.delta_b2;
  eff.sigma2 = eff.sigma_n2;
  return coupling_for(eff, ReceiverSpec{Estimator::kMl, Mode::kDirect});
}

double weighted_mean(const std::vector<PowerPoint>& pts, bool est) {
  double acc = 0.0;
  for (const auto& p : pts) acc += p.weight * (est ? p.p_est : p.p_true);
  return acc;
}

}  // namespace

PowerDistribution::PowerDistribution(std::vector<PowerPoint> points)
    : points_(std::move(points)) {}

PowerDistribution PowerDistribution::equal_power() {
  return PowerDistribution({PowerPoint{1.0, 1.0, 1.0}});
}

PowerDistribution PowerDistribution::rayleigh(std::size_t n) {
  if (n == 0) throw InvalidArgument("rayleigh: need at least one point");
  // Conditional mean of Exp(1) on each equal-probability cell [a, b]:
  // ((a + 1) e^-a - (b + 1) e^-b) / (e^-a - e^-b), with tail a + 1.
  std::vector<PowerPoint> pts(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sa = 1.0 - static_cast<double>(i) * w;  // e^-a
    const double a = -std::log(sa);
    double x = a + 1.0;
    if (i + 1 < n) {
      const double sb = sa - w;
      const double b = -std::log(sb);
      x = ((a + 1.0) * sa - (b + 1.0) * sb) / w;
    }
    pts[i] = PowerPoint{x, x, w};
  }
  return PowerDistribution(std::move(pts));
}

PowerDistribution PowerDistribution::from_raw(
    const std::vector<PowerPoint>& raw, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("from_raw: scale must be > 0");
  std::vector<PowerPoint> pts = raw;
  for (auto& p : pts) {
    p.p_true /= scale;
    p.p_est /= scale;
  }
  return PowerDistribution(std::move(pts));
}

double PowerDistribution::mean_true() const {
  return weighted_mean(points_, false);
}

double PowerDistribution::mean_est() const {
  return weighted_mean(points_, true);
}

void PowerDistribution::validate(double tol, bool check_est) const {
  if (points_.empty()) throw InvalidArgument("power distribution is empty");
  double total = 0.0;
  for (const auto& p : points_) {
    if (!(p.weight > 0.0 && p.weight <= 1.0)) {
      throw InvalidArgument("power weights must lie in (0, 1]");
    }
    if (!(p.p_true >= 0.0) || (check_est && !(p.p_est >= 0.0))) {
      throw InvalidArgument("powers must be nonnegative");
    }
    total += p.weight;
  }
  if (std::fabs(total - 1.0) > tol) {
    throw InvalidArgument("power weights must sum to 1");
  }
  if (std::fabs(mean_true() - 1.0) > tol) {
    throw InvalidArgument("true powers must have unit mean");
  }
  if (check_est && std::fabs(mean_est() - 1.0) > tol) {
    throw InvalidArgument("estimated powers must have unit mean");
  }
}

PowerDistribution PowerDistribution::with_constant_estimate(double p_est) const {
  auto pts = points_;
  for (auto& p : pts) p.p_est = p_est;
  return PowerDistribution(std::move(pts));
}

PowerDistribution PowerDistribution::with_known_powers() const {
  auto pts = points_;
  for (auto& p : pts) p.p_est = p.p_true;
  return PowerDistribution(std::move(pts));
}

double compensated_linear_residual(const SystemParams& params, double eta) {
  const double sn = params.sigma_n2;
  const double d = params.delta_h2;
  const double b = params.beta;
  return (1.0 + d + b * d / sn) * eta + b * eta / (sn + eta) - 1.0;
}

double compensated_linear_efficiency(const SystemParams& params, double tol) {
  // The residual is strictly increasing on (0, 1], negative at 0 and
  // nonnegative at 1.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (compensated_linear_residual(params, mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LinearReplicaState solve_linear(const SystemParams& params, Mode mode,
                                const SolverConfig& cfg, Estimator estimator) {
  const ReceiverSpec spec{estimator, mode};
  validate(params, spec);
  if (mode == Mode::kCompensated && estimator == Estimator::kMl) {
    check_config(cfg);
    const double eta = compensated_linear_efficiency(params);
    LinearReplicaState s;
    s.E = eta / params.sigma_n2;
    s.F = s.E;
    s.G = 0.0;
    s.m = s.E / (1.0 + s.E);
    s.q = s.m;
    s.p = 1.0;
    return s;
  }
  return iterate_linear(coupling_for(params, spec),
                        PowerDistribution::equal_power(), cfg);
}

PowerDistribution effective_powers(const PowerDistribution& powers,
                                   FilterKind kind) {
  switch (kind) {
    case FilterKind::kUnconditional:
      return powers.with_constant_estimate(1.0);
    case FilterKind::kOracle:
      return powers.with_known_powers();
    case FilterKind::kConditional:
      return powers;
  }
  return powers;
}

LinearReplicaState solve_pic(const SystemParams& params,
                             const PowerDistribution& powers,
                             const FeedbackModel& feedback,
                             const SolverConfig& cfg) {
  powers.validate();
  const auto c = pic_coupling(params, feedback);
  return iterate_linear(c, effective_powers(powers, feedback.filter_kind), cfg);
}

double linear_ber(const LinearReplicaState& state) {
  return ber(ReplicaState{state.m, state.q, state.E, state.F});
}

double pic_ber(const LinearReplicaState& state, const FeedbackModel& feedback) {
  return ber(ReplicaState{state.m, state.q, state.E,
                          state.F * feedback.delta_b2});
}

double linear_efficiency(const LinearReplicaState& state, double noise) {
  if (!(state.F > 0.0)) throw InvalidArgument("efficiency needs F > 0");
  return noise * state.E * state.E / state.F;
}

double pic_efficiency(const SystemParams& params, const FeedbackModel& feedback,
                      const LinearReplicaState& state) {
  return linear_efficiency(state, params.sigma_n2 / feedback.delta_b2);
}

double pic_free_energy(const SystemParams& params,
                       const PowerDistribution& powers,
                       const FeedbackModel& feedback,
                       const LinearReplicaState& s) {
  const auto c = pic_coupling(params, feedback);
  const auto eff = effective_powers(powers, feedback.filter_kind);
  double prior = 0.0;
  for (const auto& pt : eff.points()) {
    const double A = 1.0 + pt.p_est * (s.F - s.G);
    prior += pt.weight *
             (-0.5 * std::log(A) +
              (pt.p_true * pt.p_est * s.E * s.E + pt.p_est * s.F) / (2.0 * A));
  }
  const double B = c.beta / c.sigma2;
  const double D = 1.0 + B * c.lambda * (s.p - s.q);
  const double BX =
      c.sigma_n2 / c.sigma2 + B * (1.0 - 2.0 * c.kappa * s.m + c.lambda * s.q);
  return prior - s.E * s.m + 0.5 * s.F * s.q - 0.5 * s.G * s.p -
         (std::log(D) + BX / D) / (2.0 * c.beta);
}

double pic_residual(const SystemParams& params, const PowerDistribution& powers,
                    const FeedbackModel& feedback,
                    const LinearReplicaState& s) {
  const auto c = pic_coupling(params, feedback);
  const auto pm =
      prior_update(effective_powers(powers, feedback.filter_kind), s.E, s.F, s.G);
  const auto t = channel_update(c, s.m, s.q, s.p);
  return std::max({std::fabs(pm.m - s.m), std::fabs(pm.q - s.q),
                   std::fabs(pm.p - s.p), std::fabs(t.E - s.E),
                   std::fabs(t.F - s.F), std::fabs(t.G - s.G)});
}

double solve_flat_fading(double beta, double sigma_n2,
                         const PowerDistribution& power_law, bool mismatched,
                         const SolverConfig& cfg) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument("beta must be >= 0");
  }
  if (!(sigma_n2 > 0.0)) throw InvalidArgument("sigma_n2 must be > 0");
  power_law.validate(1e-9, /*check_est=*/false);
  check_config(cfg);

  const double mean_p = power_law.mean_true();
  auto residual = [&](double eta) {
    double mai = 0.0;
    if (mismatched) {
      mai = beta * mean_p * eta / (sigma_n2 + mean_p * eta);
    } else {
      for (const auto& pt : power_law.points()) {
        mai += pt.weight * beta * pt.p_true * eta / (sigma_n2 + pt.p_true * eta);
      }
    }
    return eta + mai - 1.0;
  };

  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (hi - lo < cfg.tol) return 0.5 * (lo + hi);
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw ConvergenceFailure("flat-fading bisection did not converge",
                           {0.5 * (lo + hi)}, hi - lo);
}

}  // namespace rmud
