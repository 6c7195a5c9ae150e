#include "aoipg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "aoipg/errors.hpp"

namespace aoipg {

FourierFeatures::FourierFeatures(int d1, int d2, double y_max, double y_back_max, bool two_dim)
    : d1_(d1), d2_(d2), y_max_(y_max), y_back_max_(y_back_max), two_dim_(two_dim) {
  if (d1_ < 1 || d2_ < 1) throw std::invalid_argument("feature dimensions must be >= 1");
  if (!(y_max_ > 0.0)) throw std::invalid_argument("y_max must be > 0");
  if (two_dim_ && !(y_back_max_ > 0.0)) throw std::invalid_argument("y_back_max must be > 0");
}

FourierFeatures FourierFeatures::one_dim(int d, double y_max) {
  return FourierFeatures(d, 1, y_max, 1.0, false);
}

FourierFeatures FourierFeatures::two_dim(int d1, int d2, double y_max, double y_back_max) {
  return FourierFeatures(d1, d2, y_max, y_back_max, true);
}

bool FourierFeatures::in_domain(const State& s) const {
  if (s.y >= y_max_) return false;
  return !two_dim_ || s.y_back < y_back_max_;
}

void FourierFeatures::evaluate(const State& s, Eigen::Ref<Eigen::VectorXd> out) const {
  const double u = std::numbers::pi * std::min(s.y, y_max_) / y_max_;
  if (!two_dim_) {
    for (int k = 0; k < d1_; ++k) out[k] = std::cos(k * u);
    return;
  }
  const double v = std::numbers::pi * std::min(s.y_back, y_back_max_) / y_back_max_;
  for (int j = 0; j < d1_; ++j) {
    for (int k = 0; k < d2_; ++k) out[j * d2_ + k] = std::cos(j * u + k * v);
  }
}

Eigen::VectorXd FourierFeatures::operator()(const State& s) const {
  Eigen::VectorXd out(size());
  evaluate(s, out);
  return out;
}

const char* to_string(ActionKind kind) { return kind == ActionKind::Wait ? "wait" : "discard"; }

StochasticPolicy::StochasticPolicy(FourierFeatures features, double a_min, double a_max, double sigma,
                                   ActionKind kind)
    : features_(std::move(features)),
      theta_(Eigen::VectorXd::Zero(features_.size())),
      a_min_(a_min),
      a_max_(a_max),
      sigma_(sigma),
      clamp_eps_(1e-9 * (a_max - a_min)),
      kind_(kind) {
  if (!(a_min_ >= 0.0 && a_min_ < a_max_)) throw std::invalid_argument("policy bounds must satisfy 0 <= a_min < a_max");
  if (!(sigma_ > 0.0)) throw std::invalid_argument("policy sigma must be > 0");
}

double StochasticPolicy::mu(const State& s) const { return theta_.dot(features_(s)); }

double StochasticPolicy::transform(double g) const {
  const double a = a_min_ + (a_max_ - a_min_) / (1.0 + std::exp(-g));
  return std::clamp(a, a_min_ + clamp_eps_, a_max_ - clamp_eps_);
}

double StochasticPolicy::sample_action(const State& s, Rng& rng) const {
  if (!in_domain(s)) return out_of_range_action();
  std::normal_distribution<double> normal(mu(s), sigma_);
  return transform(normal(rng));
}

double StochasticPolicy::logit(double a) const { return std::log(a - a_min_) - std::log(a_max_ - a); }

void StochasticPolicy::check_support(double a) const {
  if (!(a > a_min_ && a < a_max_)) {
    throw std::domain_error("action " + std::to_string(a) + " outside the open support (" +
                            std::to_string(a_min_) + ", " + std::to_string(a_max_) + ")");
  }
}

double StochasticPolicy::log_pdf(double a, const State& s) const {
  check_support(a);
  const double z = (logit(a) - mu(s)) / sigma_;
  return std::log(a_max_ - a_min_) - std::log(sigma_ * std::sqrt(2.0 * std::numbers::pi)) -
         std::log(a - a_min_) - std::log(a_max_ - a) - 0.5 * z * z;
}

double StochasticPolicy::pdf(double a, const State& s) const {
  // The density vanishes at both ends of the support.
  if (!(a > a_min_ && a < a_max_)) return 0.0;
  return std::exp(log_pdf(a, s));
}

Eigen::VectorXd StochasticPolicy::eligibility(double a, const State& s) const {
  check_support(a);
  Eigen::VectorXd f = features_(s);
  const double scale = (logit(a) - theta_.dot(f)) / (sigma_ * sigma_);
  return scale * f;
}

double StochasticPolicy::mean_action(const State& s) const {
  if (!in_domain(s)) return out_of_range_action();
  // Trapezoid rule over the standard normal; exponentially accurate for this
  // smooth, rapidly decaying integrand.
  constexpr int kNodes = 321;
  constexpr double kHalfWidth = 8.0;
  const double m = mu(s);
  const double h = 2.0 * kHalfWidth / (kNodes - 1);
  double weighted = 0.0;
  double weight = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double z = -kHalfWidth + i * h;
    const double phi = std::exp(-0.5 * z * z);
    weighted += phi * (a_min_ + (a_max_ - a_min_) / (1.0 + std::exp(-(m + sigma_ * z))));
    weight += phi;
  }
  return weighted / weight;
}

void StochasticPolicy::update(double delta, const Eigen::VectorXd& elig, double alpha) {
  if (!std::isfinite(delta)) throw AbortError("policy update received non-finite delta");
  theta_.noalias() += (alpha * delta) * elig;
}

ValueFunction::ValueFunction(FourierFeatures features)
    : features_(std::move(features)), omega_(Eigen::VectorXd::Zero(features_.size())) {}

double ValueFunction::value(const State& s) const { return omega_.dot(features_(s)); }

void ValueFunction::update(double delta, const State& s, double alpha) {
  if (!std::isfinite(delta)) throw AbortError("critic update received non-finite delta");
  omega_.noalias() += (alpha * delta) * features_(s);
}

}  // namespace aoipg
