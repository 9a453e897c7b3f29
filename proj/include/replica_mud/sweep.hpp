#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "replica_mud/linear_turbo.hpp"
#include "replica_mud/mc_lab.hpp"
#include "replica_mud/replica_solvers.hpp"

namespace rmud {

enum class Command {
  kReplicaSweep,
  kMcSweep,
  kLinearSweep,
  kPicSweep,
  kFadingSweep,
  kTrainingSweep,
  kCompare,
};

/// Inclusive linear grid; steps == 1 yields {start}.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;

  std::vector<double> values() const;
  bool operator==(const Range&) const = default;
};

/// "start:stop:steps" or a single number.
Range parse_range(const std::string& text);
std::string format_range(const Range& range);

enum class PowerLaw { kEqual, kRayleigh, kTwoLevel };

struct SweepSpec {
  Command command = Command::kReplicaSweep;

  // Replica-side system.
  double beta = 0.5;
  double sigma_n2 = 0.2;
  std::optional<double> sigma2;  // control parameter; defaults to sigma_n2
  Range delta_h2{0.0, 0.4, 9};
  Estimator estimator = Estimator::kMl;
  Mode mode = Mode::kDirect;
  CompensatedMmseForm cmmse_form = CompensatedMmseForm::kConsistent;

  // Monte Carlo (mc-sweep, compare).  Their load is users / chips.
  Detector detector = Detector::kIoExact;
  CodeModel code_model = CodeModel::kConvolution;
  int users = 10;
  int chips = 150;
  int delay_spread = 50;
  int trials = 1000;
  int redraws = 20;
  std::uint64_t seed = 1;

  // PIC and fading.
  double delta_b2 = 1.0;
  FilterKind filter = FilterKind::kUnconditional;
  PowerLaw power_law = PowerLaw::kEqual;
  int power_points = 64;
  Range snr_db{0.0, 20.0, 6};

  // Training.
  std::vector<int> coherence_times{50, 100, 200, 400, 800};
  std::vector<double> betas{0.5, 1.0, 2.0};
  int alpha_grid = 200;
  bool bits = false;

  unsigned threads = 0;  // 0 = hardware concurrency
  std::string out = "-";

  bool operator==(const SweepSpec&) const = default;
};

/// Usage problems (bad flag, bad value, help request).  exit_code() is 0 for
/// --help and 2 otherwise.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, int exit_code)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Parses argv-style tokens (without the program name).  Config file values
/// given through --config are overridden by flags.
SweepSpec parse_sweep_args(const std::vector<std::string>& args);

/// Throws InvalidArgument when a sweep lies outside a solver's domain.
void validate(const SweepSpec& spec);

/// Tokens that reproduce spec when fed back to parse_sweep_args.
std::vector<std::string> to_args(const SweepSpec& spec);

std::string command_name(Command command);
std::vector<std::string> csv_columns(Command command);

/// Writes the config echo, header and rows.  Throws on the first failing
/// parameter point (rows are only written when every point succeeds).
void run_sweep(const SweepSpec& spec, std::ostream& out, std::ostream& log);

/// Full CLI: parse, validate, run, map errors to exit codes (0/1/2).
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace rmud
