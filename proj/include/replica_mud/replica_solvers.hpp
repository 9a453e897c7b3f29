#pragma once

#include <cstddef>
#include <vector>

#include "replica_mud/gauss_quad.hpp"

namespace rmud {

/// Macroscopic system description.  sigma2 is the receiver's control
/// parameter: sigma_n2 gives individually optimal detection, values near 0
/// approximate jointly optimal detection and large values the matched filter.
struct SystemParams {
  double beta = 0.5;      // load K/N
  double sigma_n2 = 0.2;  // noise variance (inverse SNR)
  double delta_h2 = 0.0;  // equivalent-code estimation error variance
  double sigma2 = 0.2;    // control parameter

  /// Params with sigma2 == sigma_n2.
  static SystemParams individually_optimal(double beta, double sigma_n2,
                                           double delta_h2);
};

enum class Estimator { kMl, kMmse };
enum class Mode { kPerfect, kDirect, kCompensated };

/// Which numerator to use for F in the compensated receiver under MMSE
/// channel estimation.  kConsistent carries the "+1" term that the direct
/// receiver has; kAsPrinted drops it.  Only kConsistent reduces to the
/// perfect-CSI system at zero estimation error and restores E == F.
enum class CompensatedMmseForm { kConsistent, kAsPrinted };

struct ReceiverSpec {
  Estimator estimator = Estimator::kMl;
  Mode mode = Mode::kPerfect;
  CompensatedMmseForm cmmse_form = CompensatedMmseForm::kConsistent;
};

/// Replica-symmetric order parameters for binary symbols.
struct ReplicaState {
  double m = 0.0;
  double q = 0.0;
  double E = 0.0;
  double F = 0.0;
};

struct SolverConfig {
  double tol = 1e-12;
  int max_iter = 10000;
  double damping = 0.5;
  std::size_t quad_order = kDefaultPanelOrder;  // nodes per panel
  // Only m and q are used; E and F are derived from them before iterating.
  ReplicaState init{0.99, 0.99, 0.0, 0.0};
};

/// Effective coupling seen by the replicated receiver.  Every receiver
/// variant differs only through these four numbers:
///   E = kappa / (sigma2 + beta*lambda*(p - q))
///   F = lambda * (sigma_n2 + beta*(1 - 2*kappa*m + lambda*q))
///            / (sigma2 + beta*lambda*(p - q))^2
/// with p = 1 for binary symbols.
struct ChannelCoupling {
  double kappa = 1.0;   // true/postulated code correlation factor
  double lambda = 1.0;  // postulated code energy factor
  double sigma2 = 0.0;  // effective control parameter
  double sigma_n2 = 0.0;
  double beta = 0.0;
  double delta_h2 = 0.0;
  bool cmmse_as_printed = false;
};

ChannelCoupling coupling_for(const SystemParams& params,
                             const ReceiverSpec& spec);

/// Throws InvalidArgument when params are outside the domain of spec.
void validate(const SystemParams& params, const ReceiverSpec& spec);

struct ConjugatePair {
  double E;
  double F;
};

/// (E, F) from (m, q) and the Gaussian-prior self overlap p (1 for binary).
ConjugatePair conjugate_update(const ChannelCoupling& c, double m, double q,
                               double p = 1.0);

/// Max-norm of (map(state) - state) over all four order parameters, with
/// the E and F differences taken relative to max(1, |E|) and max(1, |F|).
double fixed_point_residual(const SystemParams& params,
                            const ReceiverSpec& spec,
                            const ReplicaState& state,
                            std::size_t quad_order = kDefaultPanelOrder);

ReplicaState solve_fixed_point(const SystemParams& params,
                               const ReceiverSpec& spec,
                               const SolverConfig& cfg = {});

/// Q(E / sqrt(F)).
double ber(const ReplicaState& state);

/// Closed-form output SINR of the receiver variant.  Rejects states that do
/// not solve (params, spec).
double sinr(const SystemParams& params, const ReceiverSpec& spec,
            const ReplicaState& state);

/// Multiuser efficiency of the compensated receiver from its Tse-Hanly style
/// equation, solved by damped iteration on eta.
double multiuser_efficiency(const SystemParams& params, Estimator estimator,
                            const SolverConfig& cfg = {});

/// Residual of the compensated-receiver efficiency equation at eta:
/// 1/eta + (beta/sigma_n2) E{tanh^2} - rhs.
double efficiency_equation_residual(const SystemParams& params,
                                    Estimator estimator, double eta,
                                    std::size_t quad_order = kDefaultPanelOrder);

/// Replica free energy evaluated at an arbitrary state (no saddle check).
double free_energy_functional(const SystemParams& params,
                              const ReceiverSpec& spec,
                              const ReplicaState& state,
                              std::size_t quad_order = kDefaultPanelOrder);

/// Free energy at a saddle point; rejects states whose residual exceeds 1e-6.
double free_energy(const SystemParams& params, const ReceiverSpec& spec,
                   const ReplicaState& state);

struct BranchSet {
  std::vector<ReplicaState> branches;
  std::vector<double> free_energies;
  std::size_t selected = 0;

  const ReplicaState& best() const { return branches.at(selected); }
};

/// Runs solve_fixed_point from the fan (0.01, 0.5, 0.99) of initial overlaps,
/// merges coincident solutions and selects the one of largest free energy.
BranchSet solve_all_branches(const SystemParams& params,
                             const ReceiverSpec& spec,
                             const SolverConfig& cfg = {});

}  // namespace rmud
