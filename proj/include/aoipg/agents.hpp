#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "aoipg/channel.hpp"
#include "aoipg/cost.hpp"
#include "aoipg/policy.hpp"

namespace aoipg {

/// Neumaier compensated running sum.
class CompensatedSum {
 public:
  explicit CompensatedSum(double initial = 0.0) : sum_(initial) {}

  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + compensation_; }

 private:
  double sum_;
  double compensation_ = 0.0;
};

/// Channel plus cost bookkeeping seen from the source. The agent only
/// observes delays and the AoI cost of each delivery as a number.
class Environment {
 public:
  Environment(DelayProcess forward, CostModel cost);
  Environment(DelayProcess forward, DelayProcess backward, CostModel cost);
  Environment(TwoWayDelayProcess channel, CostModel cost);

  /// One transmitted data unit's delay.
  double draw_attempt();

  /// Feedback delay of the delivery that just happened; 0 on one-way channels.
  double draw_backward();

  bool two_way() const { return backward_.has_value(); }

  /// AoI cost over a delivery interval that starts at age y_prev and lasts elapsed.
  double aoi_cost(double y_prev, double elapsed) const { return aoipg::aoi_cost(cost_, y_prev, elapsed); }

  const CostModel& cost_model() const { return cost_; }
  std::uint64_t attempts() const { return attempts_; }

 private:
  DelayProcess forward_;
  std::optional<DelayProcess> backward_;
  CostModel cost_;
  std::uint64_t attempts_ = 0;
};

enum class Algorithm { Wait, Discard, Combined, ZeroWait, MaximumDelay, FixedTabular };

const char* to_string(Algorithm algorithm);
bool is_learning(Algorithm algorithm);

/// One row of a fixed per-state policy; the row nearest to the current delay
/// applies. Missing actions mean "no wait" / "never discard".
struct TableEntry {
  double y = 0.0;
  std::optional<double> z;
  std::optional<double> x;
};

struct StepOutcome {
  double z = 0.0;
  double x = std::numeric_limits<double>::infinity();
  int k = 1;
  double y_next = 0.0;
  double y_back_next = 0.0;
  double w = 0.0;
  double c_u = 0.0;
  double delta = 0.0;
  bool learned = false;  // false when the fixed out-of-range action was used
};

struct AgentState {
  CompensatedSum c_total{0.0};
  CompensatedSum d_total{1.0};
  State current;
  std::uint64_t steps = 0;

  double beta_hat() const { return c_total.value() / d_total.value(); }
};

class Agent {
 public:
  static constexpr int kMaxAttempts = 1'000'000;
  static constexpr double kDeltaLimit = 1e12;

  static Agent wait(StochasticPolicy policy, double f, double alpha_theta);
  static Agent discard(StochasticPolicy policy, ValueFunction critic, double f, double alpha_theta,
                       double alpha_omega);
  static Agent combined(StochasticPolicy wait_policy, StochasticPolicy discard_policy, ValueFunction critic,
                        double f, double alpha_theta, double alpha_omega);
  static Agent zero_wait(double f);
  static Agent maximum_delay(double x_max, double f);
  static Agent fixed_tabular(std::vector<TableEntry> table, double f);

  Algorithm algorithm() const { return algorithm_; }
  const AgentState& state() const { return state_; }
  double beta_hat() const { return state_.beta_hat(); }
  double transmission_cost() const { return f_; }

  const std::optional<StochasticPolicy>& wait_policy() const { return wait_policy_; }
  const std::optional<StochasticPolicy>& discard_policy() const { return discard_policy_; }
  const std::optional<ValueFunction>& critic() const { return critic_; }
  std::optional<StochasticPolicy>& wait_policy() { return wait_policy_; }
  std::optional<StochasticPolicy>& discard_policy() { return discard_policy_; }
  std::optional<ValueFunction>& critic() { return critic_; }

  /// One delivery with the null action to obtain the first state. Costs of
  /// this delivery are not accrued.
  StepOutcome bootstrap(Environment& env);

  /// Algorithm 1, 2, 3 or a fixed baseline, depending on how the agent was built.
  StepOutcome step(Environment& env, Rng& rng);

  StepOutcome wait_step(Environment& env, Rng& rng);
  StepOutcome discard_step(Environment& env, Rng& rng);
  StepOutcome combined_step(Environment& env, Rng& rng);
  StepOutcome baseline_step(Environment& env);

 private:
  Agent(Algorithm algorithm, double f) : algorithm_(algorithm), f_(f) {}

  // Transmits until a unit with delay <= x is delivered.
  static void deliver(Environment& env, double x, StepOutcome& out);

  // Elapsed time, feedback delay and AoI cost of a finished delivery.
  void observe(Environment& env, StepOutcome& out) const;

  // C += k f + c_u, returns delta (critic terms included when present).
  double account(const StepOutcome& out);
  void advance(const StepOutcome& out);
  static void check_delta(double delta);

  Algorithm algorithm_;
  double f_;
  double alpha_theta_ = 0.0;
  double alpha_omega_ = 0.0;
  double x_max_ = std::numeric_limits<double>::infinity();
  std::optional<StochasticPolicy> wait_policy_;
  std::optional<StochasticPolicy> discard_policy_;
  std::optional<ValueFunction> critic_;
  std::vector<TableEntry> table_;
  AgentState state_;
};

}  // namespace aoipg
