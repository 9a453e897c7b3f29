#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rmud {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by iterative solvers; carries the last iterate and its residual so
// callers can inspect how far the iteration got.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> last_state,
                     double residual)
      : std::runtime_error(what),
        last_state_(std::move(last_state)),
        residual_(residual) {}

  const std::vector<double>& last_state() const noexcept { return last_state_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> last_state_;
  double residual_;
};

class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Infeasible training design; min_feasible is the infimum of admissible alpha.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, double min_feasible)
      : std::domain_error(what), min_feasible_(min_feasible) {}
  double min_feasible() const noexcept { return min_feasible_; }

 private:
  double min_feasible_;
};

}  // namespace rmud
