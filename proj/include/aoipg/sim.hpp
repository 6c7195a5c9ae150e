#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aoipg/agents.hpp"
#include "aoipg/channel.hpp"
#include "aoipg/cost.hpp"
#include "aoipg/oracle.hpp"
#include "aoipg/policy.hpp"

namespace aoipg {

struct AgentSpec {
  Algorithm algorithm = Algorithm::Wait;
  double z_max = 5.0;
  double x_min = 2.0;
  double x_max = 10.0;
  double alpha_theta = 1e-4;
  double alpha_omega = 1e-3;
  double sigma = 0.5;
  int d = 10;
  int n = 10;
  int d1 = 10;
  int d2 = 10;
  double y_max = 10.0;
  double y_back_max = 10.0;
  std::vector<TableEntry> table;
};

struct SimSpec {
  double horizon = 1e6;  // logical time units after the bootstrap delivery
  std::uint64_t max_steps = 100'000'000;
  int replications = 100;
  std::uint64_t master_seed = 1;
  int record_decimation = 100;
  int jobs = 1;
};

struct ExperimentConfig {
  ChannelParams channel = LognormalParams{};
  std::optional<LognormalParams> backward;  // two-way channel when present
  CostModel cost{PenaltyBased{IdentityPenalty{}}, 0.0};
  AgentSpec agent;
  SimSpec sim;
};

void validate(const ExperimentConfig& cfg);

/// Builds the agent described by cfg.agent, with cfg.cost.f as its
/// transmission cost.
Agent make_agent(const ExperimentConfig& cfg);

/// Builds the channel and cost environment for one run.
Environment make_environment(const ExperimentConfig& cfg, std::uint64_t run_seed);

struct TraceSample {
  std::uint64_t step = 0;
  double time = 0.0;  // D after the step
  double beta_hat = 0.0;
  double z = 0.0;
  double x = 0.0;
  double y = 0.0;  // state after the step
};

struct PolicyPoint {
  double y = 0.0;
  double mu = 0.0;
  double mean_action = 0.0;
  ActionKind kind = ActionKind::Wait;
};

/// Empirical mean action per state bin over every step of a run. Discard
/// thresholds are recorded only when finite; waits only for agents that wait.
struct ActionBins {
  static constexpr int kBins = 50;
  double y_max = 1.0;
  bool records_wait = true;
  std::vector<double> wait_sum = std::vector<double>(kBins, 0.0);
  std::vector<double> discard_sum = std::vector<double>(kBins, 0.0);
  std::vector<std::uint64_t> wait_count = std::vector<std::uint64_t>(kBins, 0);
  std::vector<std::uint64_t> discard_count = std::vector<std::uint64_t>(kBins, 0);
  std::vector<std::uint64_t> count = std::vector<std::uint64_t>(kBins, 0);

  void add(double y, double z, double x);
  void merge(const ActionBins& other);
};

struct Trajectory {
  std::uint64_t run_index = 0;
  std::vector<TraceSample> samples;
  std::vector<PolicyPoint> policy;
  ActionBins bins;
  double final_beta = 0.0;
  double final_time = 1.0;
  double total_cost = 0.0;  // separately accumulated sum of k f + c_u
  std::uint64_t steps = 0;
  std::uint64_t attempts = 0;
  std::optional<StochasticPolicy> wait_policy;
  std::optional<StochasticPolicy> discard_policy;
};

/// Snapshot of every learned policy on a uniform grid of [0, y_max]. On
/// two-way channels the feedback coordinate is held at y_back.
std::vector<PolicyPoint> policy_snapshot(const Agent& agent, int points = 200, double y_back = 0.0);

Trajectory run_once(const ExperimentConfig& cfg, std::uint64_t run_index);

struct CurvePoint {
  std::uint64_t step = 0;
  double time_mean = 0.0;
  double beta_mean = 0.0;
  double beta_std = 0.0;
};

struct ReplicatedSummary {
  std::vector<Trajectory> runs;
  std::vector<CurvePoint> curve;
  std::vector<PolicyPoint> policy_mean;
  ActionBins bins;
  double final_beta_mean = 0.0;
  double final_beta_std = 0.0;
};

ReplicatedSummary run_replicated(const ExperimentConfig& cfg);

/// Optimal average cost when the configuration has a computable optimum
/// (one-way Gilbert-Elliot channel with the wait or discard algorithm).
std::optional<double> oracle_beta(const ExperimentConfig& cfg);

/// The null-policy counterpart of cfg: zero-wait for wait/combined agents,
/// maximum-delay (X = y_max) for discard agents.
ExperimentConfig baseline_config(const ExperimentConfig& cfg);

// CSV output. UTF-8, header row, '.' decimal separator, shortest round-trip
// formatting for doubles.
std::string format_number(double value);
void write_runs_csv(std::ostream& out, const ReplicatedSummary& summary);
void write_policy_csv(std::ostream& out, const ReplicatedSummary& summary);
void write_policy_empirical_csv(std::ostream& out, const ActionBins& bins);
void write_curve_csv(std::ostream& out, const ReplicatedSummary& summary);
void write_summary_csv(std::ostream& out, const std::string& config_hash, const ReplicatedSummary& summary,
                       std::optional<double> oracle);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);

}  // namespace aoipg
