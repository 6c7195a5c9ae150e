#include "aoipg/agents.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "aoipg/errors.hpp"

namespace aoipg {

Environment::Environment(DelayProcess forward, CostModel cost)
    : forward_(std::move(forward)), cost_(std::move(cost)) {
  validate(cost_);
}

Environment::Environment(DelayProcess forward, DelayProcess backward, CostModel cost)
    : forward_(std::move(forward)), backward_(std::move(backward)), cost_(std::move(cost)) {
  validate(cost_);
}

Environment::Environment(TwoWayDelayProcess channel, CostModel cost)
    : Environment(std::move(channel.forward), std::move(channel.backward), std::move(cost)) {}

double Environment::draw_attempt() {
  ++attempts_;
  return forward_.next();
}

double Environment::draw_backward() { return backward_ ? backward_->next() : 0.0; }

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Wait: return "wait";
    case Algorithm::Discard: return "discard";
    case Algorithm::Combined: return "combined";
    case Algorithm::ZeroWait: return "zero_wait";
    case Algorithm::MaximumDelay: return "maximum_delay";
    case Algorithm::FixedTabular: return "fixed_tabular";
  }
  return "unknown";
}

bool is_learning(Algorithm algorithm) {
  return algorithm == Algorithm::Wait || algorithm == Algorithm::Discard || algorithm == Algorithm::Combined;
}

Agent Agent::wait(StochasticPolicy policy, double f, double alpha_theta) {
  if (policy.kind() != ActionKind::Wait) throw std::invalid_argument("wait agent needs a wait policy");
  Agent agent(Algorithm::Wait, f);
  agent.wait_policy_.emplace(std::move(policy));
  agent.alpha_theta_ = alpha_theta;
  return agent;
}

Agent Agent::discard(StochasticPolicy policy, ValueFunction critic, double f, double alpha_theta,
                     double alpha_omega) {
  if (policy.kind() != ActionKind::Discard) throw std::invalid_argument("discard agent needs a discard policy");
  Agent agent(Algorithm::Discard, f);
  agent.x_max_ = policy.a_max();
  agent.discard_policy_.emplace(std::move(policy));
  agent.critic_.emplace(std::move(critic));
  agent.alpha_theta_ = alpha_theta;
  agent.alpha_omega_ = alpha_omega;
  return agent;
}

Agent Agent::combined(StochasticPolicy wait_policy, StochasticPolicy discard_policy, ValueFunction critic,
                      double f, double alpha_theta, double alpha_omega) {
  if (wait_policy.kind() != ActionKind::Wait || discard_policy.kind() != ActionKind::Discard) {
    throw std::invalid_argument("combined agent needs one wait and one discard policy");
  }
  Agent agent(Algorithm::Combined, f);
  agent.x_max_ = discard_policy.a_max();
  agent.wait_policy_.emplace(std::move(wait_policy));
  agent.discard_policy_.emplace(std::move(discard_policy));
  agent.critic_.emplace(std::move(critic));
  agent.alpha_theta_ = alpha_theta;
  agent.alpha_omega_ = alpha_omega;
  return agent;
}

Agent Agent::zero_wait(double f) { return Agent(Algorithm::ZeroWait, f); }

Agent Agent::maximum_delay(double x_max, double f) {
  if (!(x_max > 0.0)) throw std::invalid_argument("maximum-delay threshold must be > 0");
  Agent agent(Algorithm::MaximumDelay, f);
  agent.x_max_ = x_max;
  return agent;
}

Agent Agent::fixed_tabular(std::vector<TableEntry> table, double f) {
  if (table.empty()) throw std::invalid_argument("fixed-tabular policy needs at least one entry");
  for (const auto& row : table) {
    if (row.z && !(*row.z >= 0.0)) throw std::invalid_argument("tabular wait must be >= 0");
    if (row.x && !(*row.x > 0.0)) throw std::invalid_argument("tabular discard threshold must be > 0");
  }
  Agent agent(Algorithm::FixedTabular, f);
  agent.table_ = std::move(table);
  return agent;
}

void Agent::deliver(Environment& env, double x, StepOutcome& out) {
  out.k = 1;
  for (;;) {
    const double delay = env.draw_attempt();
    if (delay <= x) {
      out.y_next = delay;
      return;
    }
    if (++out.k > kMaxAttempts) {
      throw AbortError("discard threshold " + std::to_string(x) + " cancelled " + std::to_string(kMaxAttempts) +
                       " consecutive transmissions; it is below every achievable delay");
    }
  }
}

void Agent::observe(Environment& env, StepOutcome& out) const {
  const double cancelled = out.k > 1 ? (out.k - 1) * out.x : 0.0;
  out.w = state_.current.y_back + out.z + cancelled + out.y_next;
  out.c_u = env.aoi_cost(state_.current.y, out.w);
  out.y_back_next = env.draw_backward();
}

void Agent::check_delta(double delta) {
  if (!std::isfinite(delta)) throw AbortError("non-finite delta");
  if (std::abs(delta) > kDeltaLimit) throw AbortError("delta exploded to " + std::to_string(delta));
}

double Agent::account(const StepOutcome& out) {
  const double transmission = out.k * f_;
  state_.c_total.add(transmission + out.c_u);
  double delta = -transmission - out.c_u + out.w * state_.c_total.value() / state_.d_total.value();
  if (critic_) {
    const State next{out.y_next, out.y_back_next};
    delta += critic_->value(next) - critic_->value(state_.current);
  }
  return delta;
}

void Agent::advance(const StepOutcome& out) {
  state_.d_total.add(out.w);
  state_.current = State{out.y_next, out.y_back_next};
  ++state_.steps;
}

StepOutcome Agent::bootstrap(Environment& env) {
  StepOutcome out;
  const bool discards = discard_policy_.has_value() || algorithm_ == Algorithm::MaximumDelay;
  out.x = discards ? x_max_ : std::numeric_limits<double>::infinity();
  deliver(env, out.x, out);
  out.w = (out.k - 1) * (discards ? out.x : 0.0) + out.y_next;
  out.y_back_next = env.draw_backward();
  state_.current = State{out.y_next, out.y_back_next};
  return out;
}

StepOutcome Agent::step(Environment& env, Rng& rng) {
  switch (algorithm_) {
    case Algorithm::Wait: return wait_step(env, rng);
    case Algorithm::Discard: return discard_step(env, rng);
    case Algorithm::Combined: return combined_step(env, rng);
    default: return baseline_step(env);
  }
}

StepOutcome Agent::wait_step(Environment& env, Rng& rng) {
  const StochasticPolicy& policy = *wait_policy_;
  const State s = state_.current;
  StepOutcome out;
  out.z = policy.sample_action(s, rng);
  deliver(env, out.x, out);
  observe(env, out);
  out.delta = account(out);
  check_delta(out.delta);
  out.learned = policy.in_domain(s);
  if (out.learned) wait_policy_->update(out.delta, policy.eligibility(out.z, s), alpha_theta_);
  advance(out);
  return out;
}

StepOutcome Agent::discard_step(Environment& env, Rng& rng) {
  const StochasticPolicy& policy = *discard_policy_;
  const State s = state_.current;
  StepOutcome out;
  out.x = policy.sample_action(s, rng);
  deliver(env, out.x, out);
  observe(env, out);
  out.delta = account(out);
  check_delta(out.delta);
  out.learned = policy.in_domain(s);
  if (out.learned) {
    discard_policy_->update(out.delta, policy.eligibility(out.x, s), alpha_theta_);
    critic_->update(out.delta, s, alpha_omega_);
  }
  advance(out);
  return out;
}

StepOutcome Agent::combined_step(Environment& env, Rng& rng) {
  const State s = state_.current;
  StepOutcome out;
  out.z = wait_policy_->sample_action(s, rng);
  out.x = discard_policy_->sample_action(s, rng);
  deliver(env, out.x, out);
  observe(env, out);
  out.delta = account(out);
  check_delta(out.delta);
  out.learned = wait_policy_->in_domain(s);
  if (out.learned) {
    const Eigen::VectorXd wait_elig = wait_policy_->eligibility(out.z, s);
    const Eigen::VectorXd discard_elig = discard_policy_->eligibility(out.x, s);
    wait_policy_->update(out.delta, wait_elig, alpha_theta_);
    discard_policy_->update(out.delta, discard_elig, alpha_theta_);
    critic_->update(out.delta, s, alpha_omega_);
  }
  advance(out);
  return out;
}

StepOutcome Agent::baseline_step(Environment& env) {
  StepOutcome out;
  switch (algorithm_) {
    case Algorithm::ZeroWait:
      break;
    case Algorithm::MaximumDelay:
      out.x = x_max_;
      break;
    case Algorithm::FixedTabular: {
      const TableEntry* best = &table_.front();
      for (const auto& row : table_) {
        if (std::abs(row.y - state_.current.y) < std::abs(best->y - state_.current.y)) best = &row;
      }
      out.z = best->z.value_or(0.0);
      out.x = best->x.value_or(std::numeric_limits<double>::infinity());
      break;
    }
    default:
      throw std::logic_error("baseline_step called on a learning agent");
  }
  deliver(env, out.x, out);
  observe(env, out);
  out.delta = account(out);
  advance(out);
  return out;
}

}  // namespace aoipg
