#include "replica_mud/replica_solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "replica_mud/errors.hpp"

namespace rmud {
namespace {

constexpr double kSaddleTolerance = 1e-6;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

std::vector<double> as_vector(const ReplicaState& s) {
  return {s.m, s.q, s.E, s.F};
}

double max_abs_diff(const ReplicaState& a, const ReplicaState& b) {
  return std::max({std::fabs(a.m - b.m), std::fabs(a.q - b.q),
                   std::fabs(a.E - b.E), std::fabs(a.F - b.F)});
}

void validate_config(const SolverConfig& cfg) {
  if (!finite_positive(cfg.tol)) throw InvalidArgument("tol must be > 0");
  if (cfg.max_iter <= 0) throw InvalidArgument("max_iter must be > 0");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
    throw InvalidArgument("damping must lie in (0, 1]");
  }
  if (cfg.quad_order == 0) throw InvalidArgument("quad_order must be >= 1");
}

}  // namespace

SystemParams SystemParams::individually_optimal(double beta, double sigma_n2,
                                                double delta_h2) {
  return SystemParams{beta, sigma_n2, delta_h2, sigma_n2};
}

void validate(const SystemParams& params, const ReceiverSpec& spec) {
  if (!finite_positive(params.beta)) throw InvalidArgument("beta must be > 0");
  if (!finite_positive(params.sigma_n2)) {
    throw InvalidArgument("sigma_n2 must be > 0");
  }
  if (!(std::isfinite(params.delta_h2) && params.delta_h2 >= 0.0)) {
    throw InvalidArgument("delta_h2 must be >= 0");
  }
  if (spec.mode != Mode::kCompensated && !finite_positive(params.sigma2)) {
    throw InvalidArgument("sigma2 must be finite and > 0");
  }
  if (spec.mode != Mode::kPerfect && spec.estimator == Estimator::kMmse &&
      params.delta_h2 >= 1.0) {
    throw InvalidArgument("MMSE channel estimation requires delta_h2 < 1");
  }
}

ChannelCoupling coupling_for(const SystemParams& params,
                             const ReceiverSpec& spec) {
  validate(params, spec);
  const double d = params.delta_h2;
  ChannelCoupling c;
  c.sigma_n2 = params.sigma_n2;
  c.beta = params.beta;
  c.delta_h2 = d;
  c.sigma2 = params.sigma2;
  switch (spec.mode) {
    case Mode::kPerfect:
      c.delta_h2 = 0.0;
      break;
    case Mode::kDirect:
      if (spec.estimator == Estimator::kMl) {
        c.lambda = 1.0 + d;
      } else {
        c.kappa = 1.0 - d;
        c.lambda = 1.0 - d;
      }
      break;
    case Mode::kCompensated:
      if (spec.estimator == Estimator::kMl) {
        // Codes scaled by 1/(1 + d); residual interference folded into noise.
        c.kappa = 1.0 / (1.0 + d);
        c.lambda = 1.0 / (1.0 + d);
        c.sigma2 = params.sigma_n2 + params.beta * d / (1.0 + d);
      } else {
        c.kappa = 1.0 - d;
        c.lambda = 1.0 - d;
        c.sigma2 = params.sigma_n2 + params.beta * d;
        c.cmmse_as_printed =
            spec.cmmse_form == CompensatedMmseForm::kAsPrinted;
      }
      break;
  }
  return c;
}

namespace {

// gap = p - q, passed separately so that q close to 1 keeps its precision.
ConjugatePair conjugate_from_gap(const ChannelCoupling& c, double m, double q,
                                 double gap) {
  const double den = c.sigma2 + c.beta * c.lambda * gap;
  const double E = c.kappa / den;
  double numerator;
  if (c.cmmse_as_printed) {
    numerator = c.lambda * (c.sigma_n2 - c.beta * (1.0 - c.delta_h2) *
                                             (2.0 * m - q));
  } else {
    numerator =
        c.lambda * (c.sigma_n2 + c.beta * (1.0 - 2.0 * c.kappa * m +
                                           c.lambda * q));
  }
  return {E, numerator / (den * den)};
}

}  // namespace

ConjugatePair conjugate_update(const ChannelCoupling& c, double m, double q,
                               double p) {
  return conjugate_from_gap(c, m, q, p - q);
}

double fixed_point_residual(const SystemParams& params,
                            const ReceiverSpec& spec,
                            const ReplicaState& state,
                            std::size_t quad_order) {
  const auto c = coupling_for(params, spec);
  if (!(state.F >= 0.0)) return std::numeric_limits<double>::infinity();
  const auto t = resolved_tanh_moments(state.E, state.F, quad_order);
  const auto cf = conjugate_update(c, state.m, state.q);
  return std::max({std::fabs(t.mean - state.m), std::fabs(t.mean_sq - state.q),
                   std::fabs(cf.E - state.E) / std::max(1.0, std::fabs(state.E)),
                   std::fabs(cf.F - state.F) / std::max(1.0, std::fabs(state.F))});
}

ReplicaState solve_fixed_point(const SystemParams& params,
                               const ReceiverSpec& spec,
                               const SolverConfig& cfg) {
  validate_config(cfg);
  const auto c = coupling_for(params, spec);
  const double a = cfg.damping;

  ReplicaState s{cfg.init.m, cfg.init.q, 0.0, 0.0};
  double gap = 1.0 - s.q;  // 1 - q, iterated on its own via E{sech^2}
  {
    const auto cf = conjugate_from_gap(c, s.m, s.q, gap);
    s.E = cf.E;
    s.F = cf.F;
  }

  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (!(s.F >= 0.0) || !std::isfinite(s.E)) {
      throw NumericFailure("replica iteration left the domain F >= 0");
    }
    const auto t = resolved_tanh_moments(s.E, s.F, cfg.quad_order);
    const double dm = t.mean - s.m;
    const double dq = t.mean_sq - s.q;
    s.m += a * dm;
    s.q += a * dq;
    gap += a * (t.mean_sech_sq - gap);

    const auto cf = conjugate_from_gap(c, s.m, s.q, gap);
    const double dE = cf.E - s.E;
    const double dF = cf.F - s.F;
    s.E += a * dE;
    s.F += a * dF;

    // E and F grow like 1/sigma2 near the jointly optimal limit, so they are
    // compared relative to their size.
    residual = std::max({std::fabs(dm), std::fabs(dq),
                         std::fabs(dE) / std::max(1.0, std::fabs(s.E)),
                         std::fabs(dF) / std::max(1.0, std::fabs(s.F))});
    if (!std::isfinite(residual)) break;
    if (residual < cfg.tol) return s;
  }
  std::ostringstream msg;
  msg << "replica fixed point did not converge (residual " << residual << ")";
  throw ConvergenceFailure(msg.str(), as_vector(s), residual);
}

double ber(const ReplicaState& state) {
  if (state.F < 0.0 || !std::isfinite(state.F)) {
    throw InvalidArgument("ber: F must be finite and >= 0");
  }
  if (state.F == 0.0) {
    if (state.E > 0.0) return 0.0;
    if (state.E == 0.0) return 0.5;
    throw InvalidArgument("ber: E < 0 with F = 0");
  }
  return q_function(state.E / std::sqrt(state.F));
}

double sinr(const SystemParams& params, const ReceiverSpec& spec,
            const ReplicaState& state) {
  if (fixed_point_residual(params, spec, state) > kSaddleTolerance) {
    throw InvalidArgument("sinr: state does not solve the given receiver");
  }
  const double b = params.beta;
  const double sn = params.sigma_n2;
  const double d = params.delta_h2;
  const double m = state.m;
  const double q = state.q;
  switch (spec.mode) {
    case Mode::kPerfect:
      return 1.0 / (sn + b * (1.0 - 2.0 * m + q));
    case Mode::kDirect:
      if (spec.estimator == Estimator::kMl) {
        return 1.0 / ((1.0 + d) * (sn + b * (1.0 - 2.0 * m + (1.0 + d) * q)));
      }
      return (1.0 - d) / (sn + b * (1.0 - (1.0 - d) * (2.0 * m - q)));
    case Mode::kCompensated:
      if (spec.estimator == Estimator::kMl) {
        return 1.0 / (sn * (1.0 + d) + b * d + b * (1.0 - q));
      }
      return (1.0 - d) / (sn + b * (1.0 - (1.0 - d) * q));
  }
  return 0.0;
}

double efficiency_equation_residual(const SystemParams& params,
                                    Estimator estimator, double eta,
                                    std::size_t quad_order) {
  const double b0 = params.beta / params.sigma_n2;
  const double d = params.delta_h2;
  const double rhs = estimator == Estimator::kMl ? (1.0 + d) * (1.0 + b0)
                                                 : (1.0 + b0) / (1.0 - d);
  const double snr = eta / params.sigma_n2;
  const double q =
      resolved_expect(Integrand::kTanhSq, snr, snr, quad_order);
  return 1.0 / eta + b0 * q - rhs;
}

double multiuser_efficiency(const SystemParams& params, Estimator estimator,
                            const SolverConfig& cfg) {
  validate_config(cfg);
  validate(params, ReceiverSpec{estimator, Mode::kCompensated});
  const double b0 = params.beta / params.sigma_n2;
  const double d = params.delta_h2;
  const double rhs = estimator == Estimator::kMl ? (1.0 + d) * (1.0 + b0)
                                                 : (1.0 + b0) / (1.0 - d);
  double eta = 1.0;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double snr = eta / params.sigma_n2;
    const double q = resolved_expect(Integrand::kTanhSq, snr, snr, cfg.quad_order);
    const double next = 1.0 / (rhs - b0 * q);
    residual = std::fabs(next - eta);
    eta += cfg.damping * (next - eta);
    if (residual < cfg.tol) return eta;
  }
  throw ConvergenceFailure("multiuser efficiency iteration did not converge",
                           {eta}, residual);
}

double free_energy_functional(const SystemParams& params,
                              const ReceiverSpec& spec,
                              const ReplicaState& state,
                              std::size_t quad_order) {
  const auto c = coupling_for(params, spec);
  const double B = c.beta / c.sigma2;
  const double D = 1.0 + B * c.lambda * (1.0 - state.q);
  // B * (1/B0 + 1 - 2 kappa m + lambda q), with B/B0 = sigma_n2 / sigma2.
  const double BX = c.sigma_n2 / c.sigma2 +
                    B * (1.0 - 2.0 * c.kappa * state.m + c.lambda * state.q);
  const double prior = resolved_expect(Integrand::kLogCosh, state.E, state.F, quad_order) -
                       state.E * state.m - 0.5 * state.F * (1.0 - state.q);
  return prior - (std::log(D) + BX / D) / (2.0 * c.beta);
}

double free_energy(const SystemParams& params, const ReceiverSpec& spec,
                   const ReplicaState& state) {
  const double r = fixed_point_residual(params, spec, state);
  if (!(r <= kSaddleTolerance)) {
    throw InvalidArgument("free_energy: state is not a saddle point");
  }
  return free_energy_functional(params, spec, state);
}

BranchSet solve_all_branches(const SystemParams& params,
                             const ReceiverSpec& spec,
                             const SolverConfig& cfg) {
  constexpr std::array<double, 3> kInitOverlaps{0.01, 0.5, 0.99};
  constexpr double kSameBranch = 1e-6;

  std::vector<ReplicaState> found;
  double last_residual = std::numeric_limits<double>::infinity();
  std::vector<double> last_state;
  for (double overlap : kInitOverlaps) {
    SolverConfig local = cfg;
    local.init = ReplicaState{overlap, overlap, 0.0, 0.0};
    try {
      const auto s = solve_fixed_point(params, spec, local);
      const bool seen = std::any_of(found.begin(), found.end(), [&](auto& f) {
        return max_abs_diff(f, s) < kSameBranch;
      });
      if (!seen) found.push_back(s);
    } catch (const ConvergenceFailure& e) {
      last_residual = e.residual();
      last_state = e.last_state();
    } catch (const NumericFailure&) {
    }
  }
  if (found.empty()) {
    throw ConvergenceFailure("no initialisation reached a fixed point",
                             last_state, last_residual);
  }

  std::sort(found.begin(), found.end(),
            [](const ReplicaState& a, const ReplicaState& b) { return a.m < b.m; });
  BranchSet out;
  out.branches = std::move(found);
  out.free_energies.reserve(out.branches.size());
  for (const auto& s : out.branches) {
    out.free_energies.push_back(
        free_energy_functional(params, spec, s, cfg.quad_order));
  }
  out.selected = static_cast<std::size_t>(
      std::max_element(out.free_energies.begin(), out.free_energies.end()) -
      out.free_energies.begin());
  return out;
}

}  // namespace rmud
