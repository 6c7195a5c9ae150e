#include "aoipg/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "aoipg/errors.hpp"

namespace aoipg {

namespace {

constexpr std::uint64_t kForwardStream = 1;
constexpr std::uint64_t kBackwardStream = 2;
constexpr std::uint64_t kAgentStream = 3;

template <class F>
void rethrow_as_config(const std::string& key, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  rethrow_as_config("channel", [&] { std::visit([](const auto& p) { validate(p); }, cfg.channel); });
  if (cfg.backward) rethrow_as_config("channel.backward", [&] { validate(*cfg.backward); });
  rethrow_as_config("cost", [&] { validate(cfg.cost); });

  const AgentSpec& a = cfg.agent;
  if (!(a.z_max > 0.0)) throw ConfigError("agent.z_max", "must be > 0");
  if (!(a.x_min > 0.0)) throw ConfigError("agent.x_min", "must be > 0");
  if (!(a.x_max > a.x_min)) throw ConfigError("agent.x_max", "must exceed x_min");
  if (!(a.y_max > 0.0)) throw ConfigError("agent.y_max", "must be > 0");
  if (!(a.x_max <= a.y_max)) throw ConfigError("agent.x_max", "must not exceed y_max");
  if (!(a.y_back_max > 0.0)) throw ConfigError("agent.y_back_max", "must be > 0");
  if (!(a.sigma > 0.0)) throw ConfigError("agent.sigma", "must be > 0");
  if (!(a.alpha_theta >= 0.0)) throw ConfigError("agent.alpha_theta", "must be >= 0");
  if (!(a.alpha_omega >= 0.0)) throw ConfigError("agent.alpha_omega", "must be >= 0");
  if (a.d < 1) throw ConfigError("agent.d", "must be >= 1");
  if (a.n < 1) throw ConfigError("agent.n", "must be >= 1");
  if (a.d1 < 1) throw ConfigError("agent.d1", "must be >= 1");
  if (a.d2 < 1) throw ConfigError("agent.d2", "must be >= 1");
  if (a.algorithm == Algorithm::FixedTabular && a.table.empty()) {
    throw ConfigError("agent.table", "fixed_tabular needs at least one entry");
  }

  const SimSpec& s = cfg.sim;
  if (!(s.horizon >= 0.0)) throw ConfigError("sim.horizon", "must be >= 0");
  if (s.max_steps < 1) throw ConfigError("sim.max_steps", "must be >= 1");
  if (s.replications < 1) throw ConfigError("sim.replications", "must be >= 1");
  if (s.record_decimation < 1) throw ConfigError("sim.record_decimation", "must be >= 1");
  if (s.jobs < 1) throw ConfigError("sim.jobs", "must be >= 1");
}

Agent make_agent(const ExperimentConfig& cfg) {
  const AgentSpec& a = cfg.agent;
  const bool two_way = cfg.backward.has_value();
  const FourierFeatures policy_features = two_way ? FourierFeatures::two_dim(a.d1, a.d2, a.y_max, a.y_back_max)
                                                  : FourierFeatures::one_dim(a.d, a.y_max);
  const FourierFeatures critic_features = two_way ? FourierFeatures::two_dim(a.d1, a.d2, a.y_max, a.y_back_max)
                                                  : FourierFeatures::one_dim(a.n, a.y_max);
  const double f = cfg.cost.f;
  auto wait_policy = [&] { return StochasticPolicy(policy_features, 0.0, a.z_max, a.sigma, ActionKind::Wait); };
  auto discard_policy = [&] {
    return StochasticPolicy(policy_features, a.x_min, a.x_max, a.sigma, ActionKind::Discard);
  };
  switch (a.algorithm) {
    case Algorithm::Wait: return Agent::wait(wait_policy(), f, a.alpha_theta);
    case Algorithm::Discard:
      return Agent::discard(discard_policy(), ValueFunction(critic_features), f, a.alpha_theta, a.alpha_omega);
    case Algorithm::Combined:
      return Agent::combined(wait_policy(), discard_policy(), ValueFunction(critic_features), f, a.alpha_theta,
                             a.alpha_omega);
    case Algorithm::ZeroWait: return Agent::zero_wait(f);
    case Algorithm::MaximumDelay: return Agent::maximum_delay(a.y_max, f);
    case Algorithm::FixedTabular: return Agent::fixed_tabular(a.table, f);
  }
  throw std::logic_error("unknown algorithm");
}

Environment make_environment(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  DelayProcess forward(cfg.channel, derive_seed(run_seed, kForwardStream));
  if (cfg.backward) {
    DelayProcess backward(ChannelParams{*cfg.backward}, derive_seed(run_seed, kBackwardStream));
    return Environment(std::move(forward), std::move(backward), cfg.cost);
  }
  return Environment(std::move(forward), cfg.cost);
}

void ActionBins::add(double y, double z, double x) {
  if (!(y >= 0.0 && y < y_max)) return;
  const int bin = std::min(kBins - 1, static_cast<int>(y / y_max * kBins));
  if (records_wait) {
    wait_sum[bin] += z;
    ++wait_count[bin];
  }
  if (std::isfinite(x)) {
    discard_sum[bin] += x;
    ++discard_count[bin];
  }
  ++count[bin];
}

void ActionBins::merge(const ActionBins& other) {
  for (int i = 0; i < kBins; ++i) {
    wait_sum[i] += other.wait_sum[i];
    discard_sum[i] += other.discard_sum[i];
    wait_count[i] += other.wait_count[i];
    discard_count[i] += other.discard_count[i];
    count[i] += other.count[i];
  }
}

std::vector<PolicyPoint> policy_snapshot(const Agent& agent, int points, double y_back) {
  std::vector<PolicyPoint> out;
  for (const auto* policy : {&agent.wait_policy(), &agent.discard_policy()}) {
    if (!policy->has_value()) continue;
    const StochasticPolicy& pol = **policy;
    const double y_max = pol.features().y_max();
    for (int i = 0; i < points; ++i) {
      const State s{y_max * i / (points - 1), y_back};
      out.push_back(PolicyPoint{s.y, pol.mu(s), pol.mean_action(s), pol.kind()});
    }
  }
  return out;
}

Trajectory run_once(const ExperimentConfig& cfg, std::uint64_t run_index) {
  validate(cfg);
  const std::uint64_t run_seed = derive_seed(cfg.sim.master_seed, run_index);
  Environment env = make_environment(cfg, run_seed);
  Agent agent = make_agent(cfg);
  Rng rng(derive_seed(run_seed, kAgentStream));

  Trajectory traj;
  traj.run_index = run_index;
  traj.bins.y_max = cfg.agent.y_max;
  traj.bins.records_wait = cfg.agent.algorithm != Algorithm::Discard && cfg.agent.algorithm != Algorithm::MaximumDelay;

  const double end_time = 1.0 + cfg.sim.horizon;
  const auto decimation = static_cast<std::uint64_t>(cfg.sim.record_decimation);
  CompensatedSum total_cost;
  try {
    StepOutcome last = agent.bootstrap(env);
    traj.samples.push_back(TraceSample{0, agent.state().d_total.value(), 0.0, last.z, last.x, last.y_next});
    while (agent.state().d_total.value() < end_time && agent.state().steps < cfg.sim.max_steps) {
      const State before = agent.state().current;
      const StepOutcome out = agent.step(env, rng);
      last = out;
      total_cost.add(out.k * agent.transmission_cost() + out.c_u);
      traj.bins.add(before.y, out.z, out.x);
      const std::uint64_t step = agent.state().steps;
      if (step % decimation == 0) {
        traj.samples.push_back(
            TraceSample{step, agent.state().d_total.value(), agent.beta_hat(), out.z, out.x, out.y_next});
      }
    }
    if (traj.samples.back().step != agent.state().steps) {
      traj.samples.push_back(TraceSample{agent.state().steps, agent.state().d_total.value(), agent.beta_hat(), last.z,
                                         last.x, last.y_next});
    }
  } catch (const AbortError& e) {
    throw AbortError("run " + std::to_string(run_index) + ", step " + std::to_string(agent.state().steps + 1) +
                     ": " + e.what());
  }

  traj.steps = agent.state().steps;
  traj.attempts = env.attempts();
  traj.final_beta = agent.beta_hat();
  traj.final_time = agent.state().d_total.value();
  traj.total_cost = total_cost.value();
  const double y_back = cfg.backward ? cfg.backward->mean_scale : 0.0;
  traj.policy = policy_snapshot(agent, 200, y_back);
  traj.wait_policy = agent.wait_policy();
  traj.discard_policy = agent.discard_policy();
  return traj;
}

ReplicatedSummary run_replicated(const ExperimentConfig& cfg) {
  validate(cfg);
  const int total = cfg.sim.replications;
  std::vector<std::optional<Trajectory>> slots(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < total; i = next++) {
      try {
        slots[i] = run_once(cfg, static_cast<std::uint64_t>(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::min(cfg.sim.jobs, total);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ReplicatedSummary summary;
  summary.bins.y_max = cfg.agent.y_max;
  for (auto& slot : slots) summary.runs.push_back(std::move(*slot));

  std::vector<double> finals;
  for (const auto& run : summary.runs) {
    finals.push_back(run.final_beta);
    summary.bins.merge(run.bins);
  }
  summary.final_beta_mean = mean_of(finals);
  summary.final_beta_std = std_of(finals);

  // Pointwise aggregation over the prefix of recorded steps shared by all runs.
  std::size_t common = summary.runs.front().samples.size();
  for (const auto& run : summary.runs) common = std::min(common, run.samples.size());
  for (std::size_t i = 0; i < common; ++i) {
    const std::uint64_t step = summary.runs.front().samples[i].step;
    std::vector<double> betas;
    std::vector<double> times;
    bool aligned = true;
    for (const auto& run : summary.runs) {
      aligned = aligned && run.samples[i].step == step;
      betas.push_back(run.samples[i].beta_hat);
      times.push_back(run.samples[i].time);
    }
    if (!aligned) break;
    summary.curve.push_back(CurvePoint{step, mean_of(times), mean_of(betas), std_of(betas)});
  }

  summary.policy_mean = summary.runs.front().policy;
  for (std::size_t i = 0; i < summary.policy_mean.size(); ++i) {
    double mu = 0.0;
    double action = 0.0;
    for (const auto& run : summary.runs) {
      mu += run.policy[i].mu;
      action += run.policy[i].mean_action;
    }
    summary.policy_mean[i].mu = mu / total;
    summary.policy_mean[i].mean_action = action / total;
  }
  return summary;
}

std::optional<double> oracle_beta(const ExperimentConfig& cfg) {
  const auto* ge = std::get_if<GilbertElliotParams>(&cfg.channel);
  if (ge == nullptr || cfg.backward) return std::nullopt;
  if (cfg.agent.algorithm == Algorithm::Wait) {
    GeWaitProblem prob{ge->p, ge->q, ge->y0, ge->y1, cfg.agent.z_max, cfg.cost, ge->initial_state.value_or(0)};
    return ge_wait_optimize(prob).beta;
  }
  if (cfg.agent.algorithm == Algorithm::Discard) {
    GeDiscardProblem prob{ge->p, ge->q, ge->y0, ge->y1, cfg.agent.x_min, cfg.agent.x_max, cfg.cost};
    prob.seed = cfg.sim.master_seed;
    return ge_discard_optimize(prob).beta;
  }
  return std::nullopt;
}

ExperimentConfig baseline_config(const ExperimentConfig& cfg) {
  ExperimentConfig out = cfg;
  switch (cfg.agent.algorithm) {
    case Algorithm::Wait:
    case Algorithm::Combined: out.agent.algorithm = Algorithm::ZeroWait; break;
    case Algorithm::Discard: out.agent.algorithm = Algorithm::MaximumDelay; break;
    default: break;
  }
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_runs_csv(std::ostream& out, const ReplicatedSummary& summary) {
  out << "run_id,step,time,beta_hat\n";
  for (const auto& run : summary.runs) {
    for (const auto& s : run.samples) {
      out << run.run_index << ',' << s.step << ',' << format_number(s.time) << ',' << format_number(s.beta_hat)
          << '\n';
    }
  }
}

void write_policy_csv(std::ostream& out, const ReplicatedSummary& summary) {
  out << "run_id,y,mu,mean_action,kind\n";
  for (const auto& run : summary.runs) {
    for (const auto& p : run.policy) {
      out << run.run_index << ',' << format_number(p.y) << ',' << format_number(p.mu) << ','
          << format_number(p.mean_action) << ',' << to_string(p.kind) << '\n';
    }
  }
}

void write_policy_empirical_csv(std::ostream& out, const ActionBins& bins) {
  out << "y,mean_wait,mean_discard,count\n";
  const double width = bins.y_max / ActionBins::kBins;
  for (int i = 0; i < ActionBins::kBins; ++i) {
    auto mean = [](double sum, std::uint64_t n) {
      return n > 0 ? format_number(sum / static_cast<double>(n)) : std::string();
    };
    out << format_number((i + 0.5) * width) << ',' << mean(bins.wait_sum[i], bins.wait_count[i]) << ','
        << mean(bins.discard_sum[i], bins.discard_count[i]) << ',' << bins.count[i] << '\n';
  }
}

void write_curve_csv(std::ostream& out, const ReplicatedSummary& summary) {
  out << "step,time_mean,beta_mean,beta_std\n";
  for (const auto& c : summary.curve) {
    out << c.step << ',' << format_number(c.time_mean) << ',' << format_number(c.beta_mean) << ','
        << format_number(c.beta_std) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::string& config_hash, const ReplicatedSummary& summary,
                       std::optional<double> oracle) {
  out << "config_hash,final_beta_mean,final_beta_std,oracle_beta,gap_percent\n";
  out << config_hash << ',' << format_number(summary.final_beta_mean) << ','
      << format_number(summary.final_beta_std) << ',';
  if (oracle) {
    out << format_number(*oracle) << ',' << format_number(100.0 * (summary.final_beta_mean - *oracle) / *oracle);
  } else {
    out << ',';
  }
  out << '\n';
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw std::runtime_error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

}  // namespace aoipg
