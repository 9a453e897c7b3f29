#include "replica_mud/training_designer.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "replica_mud/errors.hpp"
#include "replica_mud/linear_turbo.hpp"

namespace rmud {

void validate(const TrainingProblem& problem) {
  if (problem.coherence_time < 1) {
    throw InvalidArgument("coherence time must be >= 1");
  }
  if (!std::isfinite(problem.snr_db)) throw InvalidArgument("snr_db must be finite");
  if (!(problem.beta > 0.0) || !std::isfinite(problem.beta)) {
    throw InvalidArgument("beta must be > 0");
  }
  if (problem.alpha_grid < 3) throw InvalidArgument("alpha_grid must be >= 3");
}

double noise_variance(const TrainingProblem& problem) {
  return std::pow(10.0, -problem.snr_db / 10.0);
}

double min_feasible_alpha(const TrainingProblem& problem) {
  return noise_variance(problem) / problem.coherence_time;
}

double spectral_efficiency(const TrainingProblem& problem, double alpha) {
  validate(problem);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0, 1)");
  }
  const double sn2 = noise_variance(problem);
  const double delta_h2 = sn2 / (alpha * problem.coherence_time);
  if (delta_h2 >= 1.0) {
    std::ostringstream msg;
    msg << "training fraction " << alpha << " gives delta_h2 >= 1; need alpha > "
        << min_feasible_alpha(problem);
    throw DomainError(msg.str(), min_feasible_alpha(problem));
  }
  const SystemParams params{problem.beta, sn2, delta_h2, sn2};
  const auto state = solve_linear(params, Mode::kCompensated);
  const double eta = state.E * sn2;
  const double value = (1.0 - alpha) * std::log1p(eta / sn2);
  return problem.bits ? value / std::numbers::ln2 : value;
}

TrainingOptimum optimize_alpha(const TrainingProblem& problem) {
  validate(problem);
  const double lo = min_feasible_alpha(problem);
  if (!(lo < 1.0)) {
    throw DomainError("no feasible training fraction", lo);
  }
  const double hi = 1.0;
  const std::size_t n = problem.alpha_grid;
  auto grid_point = [&](std::size_t i) {
    return lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  };

  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = spectral_efficiency(problem, grid_point(i));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }

  // Golden-section search on the cell neighbourhood of the best grid point.
  double a = best == 0 ? 0.5 * (lo + grid_point(0)) : grid_point(best - 1);
  double b = best + 1 == n ? 0.5 * (grid_point(n - 1) + hi) : grid_point(best + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = spectral_efficiency(problem, x1);
  double f2 = spectral_efficiency(problem, x2);
  while (b - a > 1e-7) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = spectral_efficiency(problem, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = spectral_efficiency(problem, x1);
    }
  }
  const double alpha = 0.5 * (a + b);
  const double value = spectral_efficiency(problem, alpha);
  if (value >= best_value) return {alpha, value};
  return {grid_point(best), best_value};
}

}  // namespace rmud
