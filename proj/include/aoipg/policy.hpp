#pragma once

#include <Eigen/Core>
#include <random>

namespace aoipg {

using Rng = std::mt19937_64;

/// What the agent knows at the start of a step: the delay of the last
/// delivered unit and, on two-way channels, the feedback delay of that
/// delivery.
struct State {
  double y = 0.0;
  double y_back = 0.0;
};

/// Cosine basis on [0, y_max] (or the 2-D grid cos(j pi y / y_max + k pi y' / y'_max)).
class FourierFeatures {
 public:
  static FourierFeatures one_dim(int d, double y_max);
  static FourierFeatures two_dim(int d1, int d2, double y_max, double y_back_max);

  int size() const { return d1_ * d2_; }
  bool is_two_dim() const { return two_dim_; }
  int d1() const { return d1_; }
  int d2() const { return d2_; }
  double y_max() const { return y_max_; }
  double y_back_max() const { return y_back_max_; }

  /// False once the state leaves the box on which the basis is fitted.
  bool in_domain(const State& s) const;

  /// Features at the state with each coordinate clamped to its upper bound.
  void evaluate(const State& s, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd operator()(const State& s) const;

 private:
  FourierFeatures(int d1, int d2, double y_max, double y_back_max, bool two_dim);

  int d1_;
  int d2_;
  double y_max_;
  double y_back_max_;
  bool two_dim_;
};

enum class ActionKind { Wait, Discard };

const char* to_string(ActionKind kind);

/// Bounded transformed-lognormal policy. With G ~ N(mu(s), sigma^2) the action
/// is a_max - (a_max - a_min) / (1 + e^G), i.e. the logit
/// log((a - a_min) / (a_max - a)) is Gaussian around mu(s) = theta . f(s).
class StochasticPolicy {
 public:
  StochasticPolicy(FourierFeatures features, double a_min, double a_max, double sigma, ActionKind kind);

  const FourierFeatures& features() const { return features_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  Eigen::VectorXd& theta() { return theta_; }
  double sigma() const { return sigma_; }
  double a_min() const { return a_min_; }
  double a_max() const { return a_max_; }
  ActionKind kind() const { return kind_; }

  bool in_domain(const State& s) const { return features_.in_domain(s); }

  /// Action used outside the learned domain: 0 for wait, a_max for discard.
  double out_of_range_action() const { return kind_ == ActionKind::Wait ? a_min_ : a_max_; }

  double mu(const State& s) const;

  /// Maps a latent Gaussian draw to an action strictly inside the support.
  double transform(double g) const;

  double sample_action(const State& s, Rng& rng) const;

  /// log((a - a_min) / (a_max - a)).
  double logit(double a) const;

  /// Throws std::domain_error outside the open support (a_min, a_max).
  double log_pdf(double a, const State& s) const;
  /// Zero outside the open support.
  double pdf(double a, const State& s) const;

  /// Gradient of log_pdf with respect to theta.
  Eigen::VectorXd eligibility(double a, const State& s) const;

  /// E[action | s] under the current parameters.
  double mean_action(const State& s) const;

  /// theta += alpha * delta * elig.
  void update(double delta, const Eigen::VectorXd& elig, double alpha);

 private:
  void check_support(double a) const;

  FourierFeatures features_;
  Eigen::VectorXd theta_;
  double a_min_;
  double a_max_;
  double sigma_;
  double clamp_eps_;
  ActionKind kind_;
};

/// Linear critic v(s) = omega . f(s).
class ValueFunction {
 public:
  explicit ValueFunction(FourierFeatures features);

  const FourierFeatures& features() const { return features_; }
  const Eigen::VectorXd& omega() const { return omega_; }
  Eigen::VectorXd& omega() { return omega_; }

  double value(const State& s) const;

  /// Gradient of value() with respect to omega, i.e. f(s).
  Eigen::VectorXd gradient(const State& s) const { return features_(s); }

  /// omega += alpha * delta * f(s).
  void update(double delta, const State& s, double alpha);

 private:
  FourierFeatures features_;
  Eigen::VectorXd omega_;
};

}  // namespace aoipg
