#include "aoipg/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aoipg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  return splitmix64(master_seed ^ splitmix64(run_index + 0x9E3779B97F4A7C15ULL));
}

double eta_from_rho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("rho must lie in [0, 1], got " + std::to_string(rho));
  }
  return std::log1p(rho * (std::numbers::e - 1.0));
}

double rho_label(double eta) { return std::expm1(eta) / (std::numbers::e - 1.0); }

double lognormal_lag1_correlation(double sigma_d, double eta) {
  const double s2 = sigma_d * sigma_d;
  return std::expm1(s2 * eta) / std::expm1(s2);
}

void validate(const LognormalParams& params) {
  if (!(params.sigma_d > 0.0)) throw std::invalid_argument("sigma_d must be > 0");
  if (!(params.eta >= 0.0 && params.eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(params.mean_scale > 0.0)) throw std::invalid_argument("mean_scale must be > 0");
}

void validate(const GilbertElliotParams& params) {
  if (!(params.p >= 0.0 && params.p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (!(params.q >= 0.0 && params.q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (!(params.y0 > 0.0 && params.y0 <= params.y1)) {
    throw std::invalid_argument("Gilbert-Elliot delays must satisfy 0 < y0 <= y1");
  }
  if (params.initial_state && *params.initial_state != 0 && *params.initial_state != 1) {
    throw std::invalid_argument("initial_state must be 0 or 1");
  }
}

LognormalMarkovDelay::LognormalMarkovDelay(const LognormalParams& params, std::uint64_t seed)
    : params_(params), rng_(seed) {
  validate(params_);
  innovation_scale_ = std::sqrt(1.0 - params_.eta * params_.eta);
  normalizer_ = std::exp(0.5 * params_.sigma_d * params_.sigma_d);
  latent_ = normal_(rng_);
}

double LognormalMarkovDelay::next() {
  const double y = params_.mean_scale * std::exp(params_.sigma_d * latent_) / normalizer_;
  latent_ = params_.eta * latent_ + innovation_scale_ * normal_(rng_);
  return y;
}

GilbertElliotDelay::GilbertElliotDelay(const GilbertElliotParams& params, std::uint64_t seed)
    : params_(params), rng_(seed) {
  validate(params_);
  if (params_.initial_state) {
    state_ = *params_.initial_state;
  } else if (params_.p + params_.q > 0.0) {
    const double bad = params_.p / (params_.p + params_.q);
    state_ = uniform_(rng_) < bad ? 1 : 0;
  } else {
    state_ = 0;
  }
}

double GilbertElliotDelay::next() {
  const double y = state_ == 0 ? params_.y0 : params_.y1;
  const double u = uniform_(rng_);
  if (state_ == 0) {
    if (u < params_.p) state_ = 1;
  } else {
    if (u < params_.q) state_ = 0;
  }
  return y;
}

DelayProcess::DelayProcess(const ChannelParams& params, std::uint64_t seed)
    : impl_(std::visit(
          [seed](const auto& p) -> std::variant<LognormalMarkovDelay, GilbertElliotDelay> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LognormalParams>) {
              return LognormalMarkovDelay(p, seed);
            } else {
              return GilbertElliotDelay(p, seed);
            }
          },
          params)) {}

double DelayProcess::next() {
  return std::visit([](auto& process) { return process.next(); }, impl_);
}

}  // namespace aoipg
