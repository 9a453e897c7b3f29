#pragma once

#include <cstddef>

namespace rmud {

/// Pilot-overhead design for a compensated linear MMSE receiver whose
/// channel-estimate error variance is sigma_n2 / (alpha * M).
struct TrainingProblem {
  int coherence_time = 100;  // M, symbol periods
  double snr_db = 5.0;
  double beta = 0.5;
  std::size_t alpha_grid = 200;  // coarse scan resolution
  bool bits = false;             // report bits/symbol instead of nats/symbol
};

void validate(const TrainingProblem& problem);

/// sigma_n2 = 10^(-snr_db / 10).
double noise_variance(const TrainingProblem& problem);

/// Smallest admissible training fraction (excluded): delta_h2 < 1 requires
/// alpha > sigma_n2 / M.
double min_feasible_alpha(const TrainingProblem& problem);

/// (1 - alpha) log(1 + eta * SNR) with SNR = 1 / sigma_n2 and eta the
/// compensated linear MMSE efficiency at delta_h2 = sigma_n2 / (alpha M).
/// Throws DomainError when alpha is infeasible.
double spectral_efficiency(const TrainingProblem& problem, double alpha);

struct TrainingOptimum {
  double alpha_star;
  double value;
};

/// Coarse grid scan over the feasible range followed by golden-section
/// refinement (to 1e-5) around the best grid point.
TrainingOptimum optimize_alpha(const TrainingProblem& problem);

}  // namespace rmud
