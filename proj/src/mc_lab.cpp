#include "replica_mud/mc_lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "replica_mud/errors.hpp"

namespace rmud {
namespace {

void check_bits(const Instance& instance, std::span<const int> bits) {
  if (static_cast<int>(bits.size()) != instance.users()) {
    throw InvalidArgument("bit vector length must equal the number of users");
  }
  for (int b : bits) {
    if (b != 1 && b != -1) throw InvalidArgument("bits must be +1 or -1");
  }
}

void check_received(const Instance& instance, const Eigen::VectorXd& r) {
  if (r.size() != instance.chips()) {
    throw InvalidArgument("received vector length must equal N");
  }
}

// Fills one user's true and estimated codes under the convolution model:
// h = s * g over the N fully-overlapped chips of an (N + P - 1)-chip window.
void draw_convolution_user(RngStream& rs, const Scenario& sc, int k,
                           Eigen::MatrixXd& H, Eigen::MatrixXd& Hh) {
  const int N = sc.N;
  const int P = sc.P;
  std::vector<double> chips(static_cast<std::size_t>(N + P - 1));
  for (auto& c : chips) c = rs.sign();

  const double tap_sd = std::sqrt(1.0 / P);
  const double err_sd = std::sqrt(sc.delta_h2 / P);
  std::vector<double> g(static_cast<std::size_t>(P));
  std::vector<double> gh(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    if (sc.estimator == Estimator::kMl) {
      // Error independent of the true tap.
      g[p] = tap_sd * rs.normal();
      gh[p] = g[p] - err_sd * rs.normal();
    } else {
      // Error independent of the estimate.
      gh[p] = std::sqrt((1.0 - sc.delta_h2) / P) * rs.normal();
      g[p] = gh[p] + err_sd * rs.normal();
    }
  }
  for (int i = 0; i < N; ++i) {
    double h = 0.0;
    double hh = 0.0;
    for (int l = 0; l < P; ++l) {
      const double s = chips[static_cast<std::size_t>(i + P - 1 - l)];
      h += s * g[l];
      hh += s * gh[l];
    }
    H(i, k) = h;
    Hh(i, k) = hh;
  }
}

void draw_independent_user(RngStream& rs, const Scenario& sc, int k,
                           Eigen::MatrixXd& H, Eigen::MatrixXd& Hh) {
  const double err_sd = std::sqrt(sc.delta_h2);
  for (int i = 0; i < sc.N; ++i) {
    if (sc.estimator == Estimator::kMl) {
      H(i, k) = rs.normal();
      Hh(i, k) = H(i, k) - err_sd * rs.normal();
    } else {
      Hh(i, k) = std::sqrt(1.0 - sc.delta_h2) * rs.normal();
      H(i, k) = Hh(i, k) + err_sd * rs.normal();
    }
  }
}

}  // namespace

void validate(const Scenario& sc) {
  if (sc.K <= 0 || sc.N <= 0 || sc.P <= 0) {
    throw InvalidArgument("K, N and P must be positive");
  }
  if (sc.P > sc.N) throw InvalidArgument("P must not exceed N");
  if (!(sc.sigma_n2 > 0.0) || !std::isfinite(sc.sigma_n2)) {
    throw InvalidArgument("sigma_n2 must be > 0");
  }
  if (!(sc.delta_h2 >= 0.0) || !std::isfinite(sc.delta_h2)) {
    throw InvalidArgument("delta_h2 must be >= 0");
  }
  if (sc.estimator == Estimator::kMmse && sc.delta_h2 >= 1.0) {
    throw InvalidArgument("MMSE channel estimation requires delta_h2 < 1");
  }
}

Instance generate_instance(const Scenario& sc, std::uint32_t index) {
  validate(sc);
  Instance inst;
  inst.true_codes.resize(sc.N, sc.K);
  inst.est_codes.resize(sc.N, sc.K);
  inst.noise_scale = std::sqrt(sc.sigma_n2);
  inst.delta_h2 = sc.delta_h2;
  inst.estimator = sc.estimator;

  RngStream rs(sc.seed, StreamTag::kInstance, index);
  for (int k = 0; k < sc.K; ++k) {
    if (sc.code_model == CodeModel::kConvolution) {
      draw_convolution_user(rs, sc, k, inst.true_codes, inst.est_codes);
    } else {
      draw_independent_user(rs, sc, k, inst.true_codes, inst.est_codes);
    }
  }
  return inst;
}

Eigen::VectorXd simulate_symbol(const Instance& instance,
                                std::span<const int> bits, RngStream& noise) {
  check_bits(instance, bits);
  const int N = instance.chips();
  Eigen::VectorXd b(instance.users());
  for (int k = 0; k < instance.users(); ++k) b[k] = bits[k];
  Eigen::VectorXd r = instance.true_codes * b / std::sqrt(static_cast<double>(N));
  for (int i = 0; i < N; ++i) r[i] += instance.noise_scale * noise.normal();
  return r;
}

Eigen::VectorXd simulate_symbol(const Instance& instance,
                                std::span<const int> bits,
                                std::uint64_t noise_seed) {
  RngStream noise(noise_seed, StreamTag::kUser);
  return simulate_symbol(instance, bits, noise);
}

ReceiverSetup receiver_setup(const Instance& instance, Mode mode,
                             Estimator estimator,
                             std::optional<double> sigma2_override) {
  const double sn2 = instance.noise_scale * instance.noise_scale;
  const double beta = static_cast<double>(instance.users()) / instance.chips();
  const double d = instance.delta_h2;
  ReceiverSetup setup;
  setup.codes = &instance.est_codes;
  setup.sigma2 = sn2;
  switch (mode) {
    case Mode::kPerfect:
      setup.codes = &instance.true_codes;
      break;
    case Mode::kDirect:
      break;
    case Mode::kCompensated:
      if (estimator == Estimator::kMl) {
        setup.scale = 1.0 / (1.0 + d);
        setup.sigma2 = sn2 + beta * d / (1.0 + d);
      } else {
        setup.sigma2 = sn2 + beta * d;
      }
      break;
  }
  if (sigma2_override) {
    if (!(*sigma2_override > 0.0)) {
      throw InvalidArgument("sigma2 override must be > 0");
    }
    setup.sigma2 = *sigma2_override;
  }
  return setup;
}

IoDetector::IoDetector(const Eigen::MatrixXd& codes, double scale,
                       double sigma2)
    : codes_(codes * (scale / std::sqrt(static_cast<double>(codes.rows())))),
      gram_(codes_.transpose() * codes_),
      inv_sigma2_(1.0 / sigma2) {
  if (codes.cols() > kMaxExactUsers) {
    throw ResourceLimit("exact detection is limited to 24 users");
  }
  if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be > 0");
}

void IoDetector::soft(const Eigen::VectorXd& received,
                      std::span<double> out) const {
  const int K = static_cast<int>(codes_.cols());
  const Eigen::VectorXd y = codes_.transpose() * received;

  // Gray-code walk over all hypotheses, starting from b = (-1, ..., -1).
  // Maintains s1 = b'y, s2 = b'Gb and Gb incrementally.
  std::vector<int> b(static_cast<std::size_t>(K), -1);
  Eigen::VectorXd gb = -gram_.rowwise().sum();
  double s1 = -y.sum();
  double s2 = gram_.sum();

  std::vector<double> pos(static_cast<std::size_t>(K), 0.0);
  double total = 0.0;
  double peak = -std::numeric_limits<double>::infinity();

  const std::uint64_t count = std::uint64_t{1} << K;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    if (idx != 0) {
      const int j = std::countr_zero(idx);
      const double delta = -2.0 * b[j];
      s1 += delta * y[j];
      s2 += 2.0 * delta * gb[j] + delta * delta * gram_(j, j);
      gb += delta * gram_.col(j);
      b[j] = -b[j];
    }
    const double mu = (s1 - 0.5 * s2) * inv_sigma2_;
    if (mu > peak) {
      const double rescale = std::exp(peak - mu);
      total *= rescale;
      for (auto& p : pos) p *= rescale;
      peak = mu;
    }
    const double w = std::exp(mu - peak);
    total += w;
    for (int k = 0; k < K; ++k) {
      if (b[k] > 0) pos[k] += w;
    }
  }
  for (int k = 0; k < K; ++k) out[k] = (2.0 * pos[k] - total) / total;
}

LinearMmseDetector::LinearMmseDetector(const Eigen::MatrixXd& codes,
                                       double scale, double sigma2) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be > 0");
  const Eigen::MatrixXd hs =
      codes * (scale / std::sqrt(static_cast<double>(codes.rows())));
  Eigen::MatrixXd normal = hs.transpose() * hs;
  normal.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw NumericFailure("MMSE normal matrix is not positive definite");
  }
  filter_ = llt.solve(hs.transpose());
  if (!filter_.allFinite()) throw NumericFailure("MMSE filter is not finite");
}

Eigen::VectorXd LinearMmseDetector::apply(const Eigen::VectorXd& received) const {
  return filter_ * received;
}

std::vector<double> detect_io(const Instance& instance,
                              const Eigen::VectorXd& received, Mode mode,
                              Estimator estimator,
                              std::optional<double> sigma2_override) {
  if (instance.users() > kMaxExactUsers) {
    throw ResourceLimit("exact detection is limited to 24 users");
  }
  check_received(instance, received);
  const auto setup =
      receiver_setup(instance, mode, estimator, sigma2_override);
  IoDetector det(*setup.codes, setup.scale, setup.sigma2);
  std::vector<double> out(static_cast<std::size_t>(instance.users()));
  det.soft(received, out);
  return out;
}

std::vector<double> detect_linear_mmse(const Instance& instance,
                                       const Eigen::VectorXd& received,
                                       Mode mode) {
  check_received(instance, received);
  const auto setup = receiver_setup(instance, mode, instance.estimator);
  LinearMmseDetector det(*setup.codes, setup.scale, setup.sigma2);
  const Eigen::VectorXd z = det.apply(received);
  return {z.data(), z.data() + z.size()};
}

std::vector<double> detect_mf(const Instance& instance,
                              const Eigen::VectorXd& received, Mode mode) {
  check_received(instance, received);
  const auto setup = receiver_setup(instance, mode, instance.estimator);
  const Eigen::VectorXd z =
      setup.codes->transpose() * received *
      (setup.scale / std::sqrt(static_cast<double>(instance.chips())));
  return {z.data(), z.data() + z.size()};
}

McResult run_ber_experiment(const Scenario& scenario, Detector detector,
                            Mode mode, int trials, int instance_redraws,
                            unsigned workers) {
  validate(scenario);
  if (trials < 1000) throw InvalidArgument("trials must be >= 1000");
  if (instance_redraws < 1) throw InvalidArgument("instance_redraws must be >= 1");
  if (detector == Detector::kIoExact && scenario.K > kMaxExactUsers) {
    throw ResourceLimit("exact detection is limited to 24 users");
  }

  const int K = scenario.K;
  std::vector<std::uint64_t> errors(static_cast<std::size_t>(instance_redraws), 0);

  auto run_instance = [&](int index) {
    const auto inst = generate_instance(scenario, static_cast<std::uint32_t>(index));
    const auto setup = receiver_setup(inst, mode, scenario.estimator);
    std::optional<IoDetector> io;
    std::optional<LinearMmseDetector> mmse;
    Eigen::MatrixXd mf;
    if (detector == Detector::kIoExact) {
      io.emplace(*setup.codes, setup.scale, setup.sigma2);
    } else if (detector == Detector::kLinearMmse) {
      mmse.emplace(*setup.codes, setup.scale, setup.sigma2);
    } else {
      mf = setup.codes->transpose() *
           (setup.scale / std::sqrt(static_cast<double>(scenario.N)));
    }

    std::vector<int> bits(static_cast<std::size_t>(K));
    std::vector<double> soft(static_cast<std::size_t>(K));
    std::uint64_t count = 0;
    for (int t = 0; t < trials; ++t) {
      RngStream bit_rng(scenario.seed, StreamTag::kBits,
                        static_cast<std::uint32_t>(index),
                        static_cast<std::uint32_t>(t));
      for (auto& b : bits) b = bit_rng.sign();
      RngStream noise(scenario.seed, StreamTag::kNoise,
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(t));
      const Eigen::VectorXd r = simulate_symbol(inst, bits, noise);
      if (io) {
        io->soft(r, soft);
      } else if (mmse) {
        const Eigen::VectorXd z = mmse->apply(r);
        std::copy(z.data(), z.data() + K, soft.begin());
      } else {
        const Eigen::VectorXd z = mf * r;
        std::copy(z.data(), z.data() + K, soft.begin());
      }
      for (int k = 0; k < K; ++k) {
        const int decision = soft[k] >= 0.0 ? 1 : -1;
        count += decision != bits[k];
      }
    }
    errors[static_cast<std::size_t>(index)] = count;
  };

  unsigned n_workers = workers == 0 ? std::thread::hardware_concurrency() : workers;
  n_workers = std::clamp<unsigned>(n_workers, 1u,
                                   static_cast<unsigned>(instance_redraws));
  if (n_workers == 1) {
    for (int i = 0; i < instance_redraws; ++i) run_instance(i);
  } else {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int i = static_cast<int>(w); i < instance_redraws;
               i += static_cast<int>(n_workers)) {
            run_instance(i);
          }
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::uint64_t total_errors = 0;
  for (auto e : errors) total_errors += e;
  McResult res;
  res.trials = static_cast<std::uint64_t>(trials) * K *
               static_cast<std::uint64_t>(instance_redraws);
  res.ber = static_cast<double>(total_errors) / static_cast<double>(res.trials);
  res.std_err = std::sqrt(res.ber * (1.0 - res.ber) / static_cast<double>(res.trials));
  return res;
}

InstanceMoments instance_moments(const Instance& instance) {
  const Eigen::MatrixXd& h = instance.true_codes;
  const Eigen::MatrixXd& hh = instance.est_codes;
  const Eigen::MatrixXd err = h - hh;
  const double n = static_cast<double>(h.size());
  InstanceMoments out{};
  out.max_energy_deviation = 0.0;
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    const double e = h.col(k).squaredNorm() / static_cast<double>(h.rows());
    out.max_energy_deviation = std::max(out.max_energy_deviation, std::fabs(e - 1.0));
  }
  out.error_variance = err.squaredNorm() / n;
  out.corr_error_true = err.cwiseProduct(h).sum() / n;
  out.corr_error_est = err.cwiseProduct(hh).sum() / n;
  out.mean_est_sq = hh.squaredNorm() / n;
  out.mean_true_est = h.cwiseProduct(hh).sum() / n;
  return out;
}

}  // namespace rmud
