#pragma once

#include <cstddef>
#include <vector>

#include "replica_mud/replica_solvers.hpp"

namespace rmud {

/// Order parameters of the Gaussian-prior (linear) replica system.  p is the
/// replica self overlap, G its conjugate.
struct LinearReplicaState {
  double m = 0.0;
  double q = 0.0;
  double p = 1.0;
  double E = 0.0;
  double F = 0.0;
  double G = 0.0;
};

struct PowerPoint {
  double p_true = 1.0;
  double p_est = 1.0;
  double weight = 1.0;
};

/// Discrete joint law of true and receiver-assumed interference powers.
/// Both marginals are normalised to unit mean.
class PowerDistribution {
 public:
  PowerDistribution() = default;
  explicit PowerDistribution(std::vector<PowerPoint> points);

  /// Single unit-power group.
  static PowerDistribution equal_power();

  /// Exponential (Rayleigh-faded) power with unit mean, discretised as the
  /// conditional means of n equal-probability cells.  p_est == p_true.
  static PowerDistribution rayleigh(std::size_t n = 64);

  /// Divides raw powers by `scale` (e.g. the mean residual power) so that a
  /// raw law of mean `scale` becomes normalised.
  static PowerDistribution from_raw(const std::vector<PowerPoint>& raw,
                                    double scale);

  const std::vector<PowerPoint>& points() const noexcept { return points_; }
  double mean_true() const;
  double mean_est() const;

  /// Throws InvalidArgument unless weights are positive and sum to 1 and
  /// both marginal means are 1 (within tol).  Set check_est=false to ignore
  /// the assumed-power marginal.
  void validate(double tol = 1e-9, bool check_est = true) const;

  /// Same true powers, assumed power replaced by `p_est` everywhere.
  PowerDistribution with_constant_estimate(double p_est) const;
  /// Same true powers, assumed power equal to the true power.
  PowerDistribution with_known_powers() const;

 private:
  std::vector<PowerPoint> points_;
};

enum class FilterKind { kUnconditional, kConditional, kOracle };

/// Decision-feedback model of one MMSE-filter PIC stage.
struct FeedbackModel {
  double delta_b2 = 1.0;  // residual symbol error variance E{(b - b_hat)^2}
  FilterKind filter_kind = FilterKind::kUnconditional;
};

/// Linear MMSE receiver.  kCompensated under ML estimation solves the
/// closed-form efficiency equation; every other combination runs the damped
/// six-parameter iteration.
LinearReplicaState solve_linear(const SystemParams& params, Mode mode,
                                const SolverConfig& cfg = {},
                                Estimator estimator = Estimator::kMl);

/// (1 + d + beta*d/sigma_n2) eta + beta*eta/(sigma_n2 + eta) - 1.
double compensated_linear_residual(const SystemParams& params, double eta);

/// Root of compensated_linear_residual in (0, 1], by bisection.
double compensated_linear_efficiency(const SystemParams& params,
                                     double tol = 1e-15);

/// Single PIC stage followed by an MMSE filter built from estimated codes and
/// assumed residual powers.  The effective noise is sigma_n2 / delta_b2.
LinearReplicaState solve_pic(const SystemParams& params,
                             const PowerDistribution& powers,
                             const FeedbackModel& feedback,
                             const SolverConfig& cfg = {});

/// Joint law actually used by the filter of the given kind.
PowerDistribution effective_powers(const PowerDistribution& powers,
                                   FilterKind kind);

/// Q(E / sqrt(F)).
double linear_ber(const LinearReplicaState& state);
/// Q(E / sqrt(F * delta_b2)) for a unit-power desired user.
double pic_ber(const LinearReplicaState& state, const FeedbackModel& feedback);

/// noise * E^2 / F: output SINR relative to the interference-free SNR.
double linear_efficiency(const LinearReplicaState& state, double noise);
double pic_efficiency(const SystemParams& params, const FeedbackModel& feedback,
                      const LinearReplicaState& state);

/// Free energy of the Gaussian-prior system; its gradient vanishes at the
/// solutions of solve_pic (and of solve_linear with a single group).
double pic_free_energy(const SystemParams& params,
                       const PowerDistribution& powers,
                       const FeedbackModel& feedback,
                       const LinearReplicaState& state);

/// Max-norm residual of the PIC fixed-point map at `state`.
double pic_residual(const SystemParams& params, const PowerDistribution& powers,
                    const FeedbackModel& feedback,
                    const LinearReplicaState& state);

/// Flat-fading MMSE efficiency: eta + E{beta P eta / (sigma_n2 + P eta)} = 1
/// when powers are known, or with P replaced by E{P} when mismatched.
double solve_flat_fading(double beta, double sigma_n2,
                         const PowerDistribution& power_law, bool mismatched,
                         const SolverConfig& cfg = {});

}  // namespace rmud
