#include "replica_mud/sweep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include "CLI11.hpp"
#include "replica_mud/errors.hpp"
#include "replica_mud/training_designer.hpp"

namespace rmud {
namespace {

// Shortest representation that parses back to the same double.
std::string fmt(double x) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

template <typename E>
struct Names {
  std::vector<std::pair<E, std::string>> table;

  const std::string& name(E value) const {
    for (const auto& [v, n] : table) {
      if (v == value) return n;
    }
    throw InvalidArgument("unnamed enum value");
  }
  E parse(const std::string& text, const char* what) const {
    for (const auto& [v, n] : table) {
      if (n == text) return v;
    }
    throw InvalidArgument(std::string("unknown ") + what + ": " + text);
  }
  std::vector<std::string> all() const {
    std::vector<std::string> out;
    for (const auto& entry : table) out.push_back(entry.second);
    return out;
  }
};

const Names<Command> kCommands{{{Command::kReplicaSweep, "replica-sweep"},
                                {Command::kMcSweep, "mc-sweep"},
                                {Command::kLinearSweep, "linear-sweep"},
                                {Command::kPicSweep, "pic-sweep"},
                                {Command::kFadingSweep, "fading-sweep"},
                                {Command::kTrainingSweep, "training-sweep"},
                                {Command::kCompare, "compare"}}};
const Names<Estimator> kEstimators{
    {{Estimator::kMl, "ml"}, {Estimator::kMmse, "mmse"}}};
const Names<Mode> kModes{{{Mode::kPerfect, "perfect"},
                          {Mode::kDirect, "direct"},
                          {Mode::kCompensated, "compensated"}}};
const Names<CompensatedMmseForm> kForms{
    {{CompensatedMmseForm::kConsistent, "consistent"},
     {CompensatedMmseForm::kAsPrinted, "as-printed"}}};
const Names<Detector> kDetectors{{{Detector::kIoExact, "io"},
                                  {Detector::kLinearMmse, "mmse"},
                                  {Detector::kMf, "mf"}}};
const Names<CodeModel> kCodeModels{{{CodeModel::kConvolution, "convolution"},
                                    {CodeModel::kIndependent, "independent"}}};
const Names<FilterKind> kFilters{{{FilterKind::kUnconditional, "unconditional"},
                                  {FilterKind::kConditional, "conditional"},
                                  {FilterKind::kOracle, "oracle"}}};
const Names<PowerLaw> kPowerLaws{{{PowerLaw::kEqual, "equal"},
                                  {PowerLaw::kRayleigh, "rayleigh"},
                                  {PowerLaw::kTwoLevel, "two-level"}}};

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw InvalidArgument("not a number: " + text);
  }
  return value;
}

class PointFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PowerDistribution make_power_law(const SweepSpec& spec) {
  switch (spec.power_law) {
    case PowerLaw::kEqual:
      return PowerDistribution::equal_power();
    case PowerLaw::kRayleigh:
      return PowerDistribution::rayleigh(
          static_cast<std::size_t>(spec.power_points));
    case PowerLaw::kTwoLevel:
      return PowerDistribution({{0.5, 0.5, 0.5}, {1.5, 1.5, 0.5}});
  }
  throw InvalidArgument("unknown power law");
}

Scenario make_scenario(const SweepSpec& spec, double delta_h2) {
  Scenario sc;
  sc.K = spec.users;
  sc.N = spec.chips;
  sc.P = spec.delay_spread;
  sc.sigma_n2 = spec.sigma_n2;
  sc.delta_h2 = delta_h2;
  sc.code_model = spec.code_model;
  sc.estimator = spec.estimator;
  sc.seed = spec.seed;
  return sc;
}

double replica_ber_for(const SweepSpec& spec, double delta_h2) {
  const double beta =
      static_cast<double>(spec.users) / static_cast<double>(spec.chips);
  SystemParams params{beta, spec.sigma_n2, delta_h2, spec.sigma_n2};
  switch (spec.detector) {
    case Detector::kIoExact: {
      ReceiverSpec rs{spec.estimator, spec.mode, spec.cmmse_form};
      return ber(solve_all_branches(params, rs).best());
    }
    case Detector::kLinearMmse:
      return linear_ber(solve_linear(params, spec.mode, {}, spec.estimator));
    case Detector::kMf: {
      // Sign decisions of the matched filter do not depend on code scaling,
      // so the compensated bank behaves like the direct one.
      params.sigma2 = 1e6;
      const Mode mode =
          spec.mode == Mode::kCompensated ? Mode::kDirect : spec.mode;
      ReceiverSpec rs{spec.estimator, mode, spec.cmmse_form};
      return ber(solve_fixed_point(params, rs));
    }
  }
  throw InvalidArgument("unknown detector");
}

struct Point {
  std::string label;
  std::function<std::string()> row;
};

// Evaluates every point, in parallel unless the points run their own pool.
std::vector<std::string> evaluate(const std::vector<Point>& points,
                                  unsigned threads, bool parallel,
                                  std::ostream& log) {
  const std::size_t n = points.size();
  std::vector<std::string> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::mutex log_mutex;
  std::size_t done = 0;

  auto work = [&](std::size_t i) {
    try {
      rows[i] = points[i].row();
    } catch (...) {
      errors[i] = std::current_exception();
    }
    std::lock_guard<std::mutex> lock(log_mutex);
    ++done;
    log << "[" << done << "/" << n << "] " << points[i].label << "\n";
  };

  unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (!parallel || workers == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw PointFailure("failed at " + points[i].label + ": " + e.what());
    }
  }
  return rows;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<Point> build_points(const SweepSpec& spec) {
  std::vector<Point> points;
  const std::string est = kEstimators.name(spec.estimator);
  const std::string mode = kModes.name(spec.mode);

  switch (spec.command) {
    case Command::kReplicaSweep:
      for (double d : spec.delta_h2.values()) {
        points.push_back({"delta_h2=" + fmt(d), [=, &spec] {
          const SystemParams params{spec.beta, spec.sigma_n2, d,
                                    spec.sigma2.value_or(spec.sigma_n2)};
          const ReceiverSpec rs{spec.estimator, spec.mode, spec.cmmse_form};
          const BranchSet set = solve_all_branches(params, rs);
          const ReplicaState& s = set.best();
          return join({fmt(d), est, mode, fmt(s.m), fmt(s.q), fmt(s.E),
                       fmt(s.F), fmt(ber(s)), fmt(sinr(params, rs, s)),
                       fmt(set.free_energies[set.selected]),
                       std::to_string(set.branches.size())},
                      ",");
        }});
      }
      break;

    case Command::kLinearSweep:
      for (double d : spec.delta_h2.values()) {
        points.push_back({"delta_h2=" + fmt(d), [=, &spec] {
          const SystemParams params{spec.beta, spec.sigma_n2, d, spec.sigma_n2};
          const auto s = solve_linear(params, spec.mode, {}, spec.estimator);
          return join({fmt(d), est, mode, fmt(s.m), fmt(s.q), fmt(s.p),
                       fmt(s.E), fmt(s.F), fmt(s.G), fmt(linear_ber(s)),
                       fmt(linear_efficiency(s, spec.sigma_n2))},
                      ",");
        }});
      }
      break;

    case Command::kPicSweep:
      for (double d : spec.delta_h2.values()) {
        points.push_back({"delta_h2=" + fmt(d), [=, &spec] {
          const SystemParams params{spec.beta, spec.sigma_n2, d, spec.sigma_n2};
          const FeedbackModel fb{spec.delta_b2, spec.filter};
          const auto s = solve_pic(params, make_power_law(spec), fb);
          return join({fmt(d), fmt(spec.delta_b2), kFilters.name(spec.filter),
                       kPowerLaws.name(spec.power_law), fmt(s.m), fmt(s.q),
                       fmt(s.p), fmt(s.E), fmt(s.F), fmt(s.G),
                       fmt(pic_ber(s, fb)), fmt(pic_efficiency(params, fb, s))},
                      ",");
        }});
      }
      break;

    case Command::kFadingSweep:
      for (double snr : spec.snr_db.values()) {
        points.push_back({"snr_db=" + fmt(snr), [=, &spec] {
          const double sn2 = std::pow(10.0, -snr / 10.0);
          const auto law = PowerDistribution::rayleigh(
              static_cast<std::size_t>(spec.power_points));
          const double eq = solve_flat_fading(
              spec.beta, sn2, PowerDistribution::equal_power(), false);
          const double known = solve_flat_fading(spec.beta, sn2, law, false);
          const double mism = solve_flat_fading(spec.beta, sn2, law, true);
          return join({fmt(snr), fmt(spec.beta), fmt(eq), fmt(known), fmt(mism)},
                      ",");
        }});
      }
      break;

    case Command::kTrainingSweep:
      for (int M : spec.coherence_times) {
        for (double b : spec.betas) {
          for (double snr : spec.snr_db.values()) {
            points.push_back(
                {"M=" + std::to_string(M) + " beta=" + fmt(b) +
                     " snr_db=" + fmt(snr),
                 [=, &spec] {
                   TrainingProblem tp{M, snr, b,
                                      static_cast<std::size_t>(spec.alpha_grid),
                                      spec.bits};
                   const auto opt = optimize_alpha(tp);
                   return join({std::to_string(M), fmt(b), fmt(snr),
                                fmt(opt.alpha_star), fmt(opt.value)},
                               ",");
                 }});
          }
        }
      }
      break;

    case Command::kMcSweep:
      for (double d : spec.delta_h2.values()) {
        points.push_back({"delta_h2=" + fmt(d), [=, &spec] {
          const auto r =
              run_ber_experiment(make_scenario(spec, d), spec.detector,
                                 spec.mode, spec.trials, spec.redraws,
                                 spec.threads);
          return join({fmt(d), est, mode, kDetectors.name(spec.detector),
                       kCodeModels.name(spec.code_model), fmt(r.ber),
                       fmt(r.std_err), std::to_string(r.trials)},
                      ",");
        }});
      }
      break;

    case Command::kCompare:
      for (double d : spec.delta_h2.values()) {
        points.push_back({"delta_h2=" + fmt(d), [=, &spec] {
          const double rep = replica_ber_for(spec, d);
          const auto r =
              run_ber_experiment(make_scenario(spec, d), spec.detector,
                                 spec.mode, spec.trials, spec.redraws,
                                 spec.threads);
          return join({fmt(d), est, mode, fmt(rep), fmt(r.ber), fmt(r.std_err),
                       std::to_string(r.trials)},
                      ",");
        }});
      }
      break;
  }
  return points;
}

}  // namespace

std::vector<double> Range::values() const {
  if (steps < 1) throw InvalidArgument("range steps must be >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  if (steps == 1) {
    out.push_back(start);
    return out;
  }
  for (int i = 0; i < steps; ++i) {
    out.push_back(i == steps - 1
                      ? stop
                      : start + (stop - start) * i / static_cast<double>(steps - 1));
  }
  return out;
}

Range parse_range(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() == 1) {
    const double v = parse_double(parts[0]);
    return {v, v, 1};
  }
  if (parts.size() != 3) {
    throw InvalidArgument("range must be start:stop:steps, got " + text);
  }
  Range r{parse_double(parts[0]), parse_double(parts[1]), 0};
  const auto& s = parts[2];
  auto res = std::from_chars(s.data(), s.data() + s.size(), r.steps);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("range steps must be an integer, got " + s);
  }
  if (r.steps < 1) throw InvalidArgument("range steps must be >= 1");
  return r;
}

std::string format_range(const Range& range) {
  return fmt(range.start) + ":" + fmt(range.stop) + ":" +
         std::to_string(range.steps);
}

std::string command_name(Command command) { return kCommands.name(command); }

std::vector<std::string> csv_columns(Command command) {
  switch (command) {
    case Command::kReplicaSweep:
      return {"delta_h2", "estimator", "mode", "m", "q", "E", "F", "ber",
              "sinr", "free_energy", "branches"};
    case Command::kLinearSweep:
      return {"delta_h2", "estimator", "mode", "m", "q", "p", "E", "F", "G",
              "ber", "efficiency"};
    case Command::kPicSweep:
      return {"delta_h2", "delta_b2", "filter", "power_law", "m", "q", "p",
              "E", "F", "G", "ber", "efficiency"};
    case Command::kFadingSweep:
      return {"snr_db", "beta", "eta_equal", "eta_known", "eta_mismatched"};
    case Command::kTrainingSweep:
      return {"M", "beta", "snr_db", "alpha_star", "spectral_efficiency"};
    case Command::kMcSweep:
      return {"delta_h2", "estimator", "mode", "detector", "code_model",
              "ber", "std_err", "trials"};
    case Command::kCompare:
      return {"delta_h2", "estimator", "mode", "ber_replica", "ber_mc",
              "mc_std_err", "trials"};
  }
  return {};
}

SweepSpec parse_sweep_args(const std::vector<std::string>& args) {
  SweepSpec spec;
  CLI::App app{"Replica-method CDMA multiuser detection sweeps", "replica-mud"};
  app.set_config("--config", "", "key = value file; flags override it");
  app.require_subcommand(1, 1);

  std::vector<CLI::App*> subs;
  const std::array<const char*, 7> descriptions{
      "binary-prior replica fixed point versus delta_h2",
      "finite-system Monte Carlo BER versus delta_h2",
      "linear MMSE replica state versus delta_h2",
      "MMSE-filtered PIC stage versus delta_h2",
      "flat-fading MMSE efficiency versus SNR",
      "optimal training fraction versus coherence time and load",
      "replica prediction next to Monte Carlo BER"};
  for (std::size_t i = 0; i < kCommands.table.size(); ++i) {
    auto* sub = app.add_subcommand(kCommands.table[i].second, descriptions[i]);
    sub->fallthrough();
    subs.push_back(sub);
  }

  std::string sigma2, delta_h2 = format_range(spec.delta_h2), snr_db;
  std::string estimator = "ml", mode = "direct", form = "consistent";
  std::string detector = "io", code_model = "convolution";
  std::string filter = "unconditional", power_law = "equal";

  app.add_option("--beta", spec.beta, "load K/N for replica commands");
  app.add_option("--sigma-n2", spec.sigma_n2, "noise variance");
  app.add_option("--sigma2", sigma2, "control parameter (replica-sweep)");
  app.add_option("--delta-h2", delta_h2, "start:stop:steps");
  app.add_option("--estimator", estimator)->check(CLI::IsMember(kEstimators.all()));
  app.add_option("--mode", mode)->check(CLI::IsMember(kModes.all()));
  app.add_option("--cmmse-form", form)->check(CLI::IsMember(kForms.all()));
  app.add_option("--detector", detector)->check(CLI::IsMember(kDetectors.all()));
  app.add_option("--code-model", code_model)
      ->check(CLI::IsMember(kCodeModels.all()));
  app.add_option("--users", spec.users, "K");
  app.add_option("--chips", spec.chips, "N");
  app.add_option("--delay-spread", spec.delay_spread, "P");
  app.add_option("--trials", spec.trials, "symbols per instance");
  app.add_option("--redraws", spec.redraws, "independent instances");
  app.add_option("--seed", spec.seed);
  app.add_option("--delta-b2", spec.delta_b2, "PIC residual symbol variance");
  app.add_option("--filter", filter)->check(CLI::IsMember(kFilters.all()));
  app.add_option("--power-law", power_law)->check(CLI::IsMember(kPowerLaws.all()));
  app.add_option("--power-points", spec.power_points);
  auto* snr_opt = app.add_option("--snr-db", snr_db, "start:stop:steps");
  app.add_option("--coherence-times", spec.coherence_times)->delimiter(',');
  app.add_option("--betas", spec.betas)->delimiter(',');
  app.add_option("--alpha-grid", spec.alpha_grid);
  app.add_flag("--bits", spec.bits, "report bits instead of nats");
  app.add_option("--threads", spec.threads, "0 = all cores");
  app.add_option("--out", spec.out, "output CSV path, - for stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help(), 0);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help(), 2);
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) spec.command = kCommands.table[i].first;
  }
  try {
    if (!sigma2.empty()) spec.sigma2 = parse_double(sigma2);
    spec.delta_h2 = parse_range(delta_h2);
    if (snr_opt->count() > 0) {
      spec.snr_db = parse_range(snr_db);
    } else if (spec.command == Command::kTrainingSweep) {
      spec.snr_db = {5.0, 5.0, 1};
    }
    spec.estimator = kEstimators.parse(estimator, "estimator");
    spec.mode = kModes.parse(mode, "mode");
    spec.cmmse_form = kForms.parse(form, "cmmse form");
    spec.detector = kDetectors.parse(detector, "detector");
    spec.code_model = kCodeModels.parse(code_model, "code model");
    spec.filter = kFilters.parse(filter, "filter");
    spec.power_law = kPowerLaws.parse(power_law, "power law");
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what(), 2);
  }
  return spec;
}

std::vector<std::string> to_args(const SweepSpec& spec) {
  std::vector<std::string> a{command_name(spec.command)};
  auto add = [&](const char* flag, std::string value) {
    a.emplace_back(flag);
    a.push_back(std::move(value));
  };
  auto csv = [](const auto& values) {
    std::vector<std::string> parts;
    for (const auto& v : values) {
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
        parts.push_back(fmt(v));
      } else {
        parts.push_back(std::to_string(v));
      }
    }
    return join(parts, ",");
  };
  add("--beta", fmt(spec.beta));
  add("--sigma-n2", fmt(spec.sigma_n2));
  if (spec.sigma2) add("--sigma2", fmt(*spec.sigma2));
  add("--delta-h2", format_range(spec.delta_h2));
  add("--estimator", kEstimators.name(spec.estimator));
  add("--mode", kModes.name(spec.mode));
  add("--cmmse-form", kForms.name(spec.cmmse_form));
  add("--detector", kDetectors.name(spec.detector));
  add("--code-model", kCodeModels.name(spec.code_model));
  add("--users", std::to_string(spec.users));
  add("--chips", std::to_string(spec.chips));
  add("--delay-spread", std::to_string(spec.delay_spread));
  add("--trials", std::to_string(spec.trials));
  add("--redraws", std::to_string(spec.redraws));
  add("--seed", std::to_string(spec.seed));
  add("--delta-b2", fmt(spec.delta_b2));
  add("--filter", kFilters.name(spec.filter));
  add("--power-law", kPowerLaws.name(spec.power_law));
  add("--power-points", std::to_string(spec.power_points));
  add("--snr-db", format_range(spec.snr_db));
  add("--coherence-times", csv(spec.coherence_times));
  add("--betas", csv(spec.betas));
  add("--alpha-grid", std::to_string(spec.alpha_grid));
  if (spec.bits) a.emplace_back("--bits");
  add("--threads", std::to_string(spec.threads));
  add("--out", spec.out);
  return a;
}

void validate(const SweepSpec& spec) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(spec.sigma_n2)) throw InvalidArgument("sigma-n2 must be > 0");
  if (!positive(spec.beta)) throw InvalidArgument("beta must be > 0");
  if (spec.sigma2 && !positive(*spec.sigma2)) {
    throw InvalidArgument("sigma2 must be > 0");
  }
  if (spec.delta_h2.steps < 1 || spec.snr_db.steps < 1) {
    throw InvalidArgument("range steps must be >= 1");
  }
  for (double d : spec.delta_h2.values()) {
    if (!(std::isfinite(d) && d >= 0.0)) {
      throw InvalidArgument("delta-h2 values must be >= 0");
    }
    if (spec.estimator == Estimator::kMmse && spec.mode != Mode::kPerfect &&
        d >= 1.0) {
      throw InvalidArgument("MMSE channel estimation needs delta-h2 < 1");
    }
  }
  for (double s : spec.snr_db.values()) {
    if (!std::isfinite(s)) throw InvalidArgument("snr-db values must be finite");
  }

  switch (spec.command) {
    case Command::kMcSweep:
    case Command::kCompare:
      if (spec.users < 1 || spec.chips < 1 || spec.delay_spread < 1) {
        throw InvalidArgument("users, chips and delay-spread must be >= 1");
      }
      if (spec.delay_spread > spec.chips) {
        throw InvalidArgument("delay-spread must not exceed chips");
      }
      if (spec.detector == Detector::kIoExact && spec.users > kMaxExactUsers) {
        throw InvalidArgument("io detector supports at most " +
                              std::to_string(kMaxExactUsers) + " users");
      }
      if (spec.trials < 1000) throw InvalidArgument("trials must be >= 1000");
      if (spec.redraws < 1) throw InvalidArgument("redraws must be >= 1");
      break;
    case Command::kPicSweep:
      if (!(spec.delta_b2 > 0.0 && spec.delta_b2 <= 1.0)) {
        throw InvalidArgument("delta-b2 must lie in (0, 1]");
      }
      if (spec.power_points < 1) throw InvalidArgument("power-points must be >= 1");
      break;
    case Command::kFadingSweep:
      if (spec.power_points < 1) throw InvalidArgument("power-points must be >= 1");
      break;
    case Command::kTrainingSweep:
      if (spec.coherence_times.empty() || spec.betas.empty()) {
        throw InvalidArgument("coherence-times and betas must be non-empty");
      }
      for (int M : spec.coherence_times) {
        if (M < 1) throw InvalidArgument("coherence times must be >= 1");
      }
      for (double b : spec.betas) {
        if (!positive(b)) throw InvalidArgument("betas must be > 0");
      }
      if (spec.alpha_grid < 3) throw InvalidArgument("alpha-grid must be >= 3");
      break;
    case Command::kReplicaSweep:
    case Command::kLinearSweep:
      break;
  }
}

void run_sweep(const SweepSpec& spec, std::ostream& out, std::ostream& log) {
  validate(spec);
  const auto points = build_points(spec);
  // Monte Carlo points already spread their trials over the worker pool.
  const bool parallel =
      spec.command != Command::kMcSweep && spec.command != Command::kCompare;
  const auto rows = evaluate(points, spec.threads, parallel, log);

  out << "# replica-mud " << join(to_args(spec), " ") << "\n";
  out << join(csv_columns(spec.command), ",") << "\n";
  for (const auto& row : rows) out << row << "\n";
  out.flush();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  SweepSpec spec;
  try {
    spec = parse_sweep_args(args);
    validate(spec);
  } catch (const UsageError& e) {
    (e.exit_code() == 0 ? out : err) << e.what();
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::ostringstream buffer;
    run_sweep(spec, buffer, err);
    if (spec.out == "-") {
      out << buffer.str();
      out.flush();
    } else {
      std::ofstream file(spec.out, std::ios::binary);
      if (!file) {
        err << "error: cannot open " << spec.out << "\n";
        return 1;
      }
      file << buffer.str();
      if (!file.flush()) {
        err << "error: write failed for " << spec.out << "\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rmud
