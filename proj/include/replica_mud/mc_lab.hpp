#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "replica_mud/replica_solvers.hpp"
#include "replica_mud/rng.hpp"

namespace rmud {

enum class CodeModel { kConvolution, kIndependent };
enum class Detector { kIoExact, kLinearMmse, kMf };

inline constexpr int kMaxExactUsers = 24;

/// Finite synchronous DS-CDMA system.
struct Scenario {
  int K = 10;  // users
  int N = 150;  // spreading gain
  int P = 50;   // delay spread in chips
  double sigma_n2 = 0.2;
  double delta_h2 = 0.0;
  CodeModel code_model = CodeModel::kConvolution;
  Estimator estimator = Estimator::kMl;
  std::uint64_t seed = 1;

  double beta() const { return static_cast<double>(K) / N; }
};

void validate(const Scenario& scenario);

/// One realised draw.  Codes are stored as N x K matrices whose column k is
/// the equivalent spreading code h_k (resp. its estimate), unit energy per
/// chip on average.
struct Instance {
  Eigen::MatrixXd true_codes;
  Eigen::MatrixXd est_codes;
  double noise_scale = 0.0;  // sigma_n
  double delta_h2 = 0.0;
  Estimator estimator = Estimator::kMl;

  int users() const { return static_cast<int>(true_codes.cols()); }
  int chips() const { return static_cast<int>(true_codes.rows()); }
};

/// Deterministic in (scenario.seed, index).
Instance generate_instance(const Scenario& scenario, std::uint32_t index = 0);

/// r = H b / sqrt(N) + n with n ~ N(0, sigma_n^2 I).
Eigen::VectorXd simulate_symbol(const Instance& instance,
                                std::span<const int> bits,
                                std::uint64_t noise_seed);
Eigen::VectorXd simulate_symbol(const Instance& instance,
                                std::span<const int> bits, RngStream& noise);

/// Code scaling and control parameter the receiver uses in a given mode.
/// kPerfect uses the true codes; kDirect the estimates with sigma_n2;
/// kCompensated rescales/inflates according to the estimator.
struct ReceiverSetup {
  const Eigen::MatrixXd* codes = nullptr;
  double scale = 1.0;
  double sigma2 = 0.0;
};
ReceiverSetup receiver_setup(const Instance& instance, Mode mode,
                             Estimator estimator,
                             std::optional<double> sigma2_override = {});

/// Exact posterior-mean detector over all 2^K hypotheses.
class IoDetector {
 public:
  IoDetector(const Eigen::MatrixXd& codes, double scale, double sigma2);
  /// Writes P(b_k = 1 | r) - P(b_k = -1 | r) into out (length K).
  void soft(const Eigen::VectorXd& received, std::span<double> out) const;

 private:
  Eigen::MatrixXd codes_;  // scaled codes / sqrt(N)
  Eigen::MatrixXd gram_;
  double inv_sigma2_;
};

/// (Hs^T Hs / N + sigma2 I)^{-1} Hs^T r / sqrt(N) with Hs the scaled codes.
class LinearMmseDetector {
 public:
  LinearMmseDetector(const Eigen::MatrixXd& codes, double scale, double sigma2);
  Eigen::VectorXd apply(const Eigen::VectorXd& received) const;

 private:
  Eigen::MatrixXd filter_;  // K x N
};

std::vector<double> detect_io(const Instance& instance,
                              const Eigen::VectorXd& received, Mode mode,
                              Estimator estimator,
                              std::optional<double> sigma2_override = {});

std::vector<double> detect_linear_mmse(const Instance& instance,
                                       const Eigen::VectorXd& received,
                                       Mode mode);

/// Matched-filter bank Hs^T r / sqrt(N): the large-sigma2 limit of the
/// posterior ratio, rescaled by sigma2.
std::vector<double> detect_mf(const Instance& instance,
                              const Eigen::VectorXd& received, Mode mode);

struct McResult {
  double ber = 0.0;
  std::uint64_t trials = 0;  // bit decisions
  double std_err = 0.0;
};

/// BER averaged over `instance_redraws` instances x `trials` symbols x K
/// users.  Result does not depend on `workers` (0 = hardware concurrency).
McResult run_ber_experiment(const Scenario& scenario, Detector detector,
                            Mode mode, int trials, int instance_redraws,
                            unsigned workers = 0);

/// Empirical moments used to check the error model on one instance.
struct InstanceMoments {
  double max_energy_deviation;  // max_k | ||h_k||^2 / N - 1 |
  double error_variance;        // mean of (h - h_hat)^2 over all entries
  double corr_error_true;       // mean of (h - h_hat) * h
  double corr_error_est;        // mean of (h - h_hat) * h_hat
  double mean_est_sq;           // mean of h_hat^2
  double mean_true_est;         // mean of h * h_hat
};
InstanceMoments instance_moments(const Instance& instance);

}  // namespace rmud
