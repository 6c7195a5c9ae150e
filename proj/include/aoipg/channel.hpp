#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <variant>

namespace aoipg {

/// SplitMix64 finalizer applied to (master_seed, run_index).
///
/// run_seed = mix(master_seed ^ mix(run_index + 0x9E3779B97F4A7C15)), where
/// mix is the SplitMix64 output function. Pure 64-bit integer arithmetic, so
/// the result is identical on every platform.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index);

/// Inverts the correlation label rho = (e^eta - 1) / (e - 1).
double eta_from_rho(double rho);

/// The labeling formula itself, kept for reports.
double rho_label(double eta);

/// Exact lag-1 correlation of the emitted lognormal delays.
double lognormal_lag1_correlation(double sigma_d, double eta);

struct LognormalParams {
  double sigma_d = 1.5;
  double eta = 0.0;
  double mean_scale = 1.0;
};

struct GilbertElliotParams {
  double p = 0.0;
  double q = 0.0;
  double y0 = 0.0;
  double y1 = 1.0;
  // Drawn from the stationary law when absent.
  std::optional<int> initial_state;
};

/// Delays Y = mean_scale * exp(sigma_d S) / exp(sigma_d^2 / 2) driven by the
/// AR(1) latent chain S' = eta S + sqrt(1 - eta^2) N.
class LognormalMarkovDelay {
 public:
  LognormalMarkovDelay(const LognormalParams& params, std::uint64_t seed);

  double next();

  const LognormalParams& params() const { return params_; }
  double latent() const { return latent_; }

 private:
  LognormalParams params_;
  double innovation_scale_;
  double normalizer_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double latent_ = 0.0;
};

/// Two-state chain with transition matrix [[1-p, p], [q, 1-q]] and a fixed
/// delay per state.
class GilbertElliotDelay {
 public:
  GilbertElliotDelay(const GilbertElliotParams& params, std::uint64_t seed);

  double next();

  const GilbertElliotParams& params() const { return params_; }
  int state() const { return state_; }

 private:
  GilbertElliotParams params_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  int state_ = 0;
};

using ChannelParams = std::variant<LognormalParams, GilbertElliotParams>;

/// Any of the supported delay generators. Each call to next() is one data
/// unit, delivered or not.
class DelayProcess {
 public:
  DelayProcess(const ChannelParams& params, std::uint64_t seed);
  explicit DelayProcess(LognormalMarkovDelay process) : impl_(std::move(process)) {}
  explicit DelayProcess(GilbertElliotDelay process) : impl_(std::move(process)) {}

  double next();

 private:
  std::variant<LognormalMarkovDelay, GilbertElliotDelay> impl_;
};

inline double next_delay(DelayProcess& process) { return process.next(); }

/// Forward data delays paired with an independent feedback-delay stream.
struct TwoWayDelayProcess {
  DelayProcess forward;
  DelayProcess backward;
};

void validate(const LognormalParams& params);
void validate(const GilbertElliotParams& params);

}  // namespace aoipg
