#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <sstream>

#include "aoipg/errors.hpp"
#include "aoipg/sim.hpp"

using namespace aoipg;

namespace {

ExperimentConfig deterministic_zero_wait(double horizon) {
  ExperimentConfig cfg;
  cfg.channel = GilbertElliotParams{0.0, 0.0, 1.0, 1.0, 0};
  cfg.cost = CostModel{PenaltyBased{IdentityPenalty{}}, 1.0};
  cfg.agent.algorithm = Algorithm::ZeroWait;
  cfg.sim.horizon = horizon;
  cfg.sim.replications = 1;
  return cfg;
}

ExperimentConfig small_learning(Algorithm algorithm) {
  ExperimentConfig cfg;
  cfg.channel = LognormalParams{1.5, eta_from_rho(0.5), 1.0};
  cfg.cost = CostModel{PenaltyBased{PowerPenalty{1.5}}, 4.0};
  cfg.agent.algorithm = algorithm;
  cfg.sim.horizon = 5000;
  cfg.sim.replications = 3;
  cfg.sim.record_decimation = 10;
  return cfg;
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("zero-wait on a deterministic channel reaches 2.5") {
    const Trajectory t = run_once(deterministic_zero_wait(1000.0), 0);
    // D = 1 + N after N unit steps; the loop stops once D >= 1 + T.
    CHECK(t.steps == 1000);
    CHECK(t.final_beta == doctest::Approx(2.5 * 1000 / 1001.0).epsilon(1e-14));
    CHECK(t.final_time == doctest::Approx(1001.0));
  }

  TEST_CASE("zero horizon records only the bootstrap") {
    const Trajectory t = run_once(deterministic_zero_wait(0.0), 0);
    CHECK(t.steps == 0);
    REQUIRE(t.samples.size() == 1);
    CHECK(t.samples[0].step == 0);
    CHECK(t.samples[0].time == 1.0);
  }

  TEST_CASE("max_steps caps the run") {
    ExperimentConfig cfg = deterministic_zero_wait(1e9);
    cfg.sim.max_steps = 250;
    CHECK(run_once(cfg, 0).steps == 250);
  }

  TEST_CASE("runs are reproducible and independent") {
    const ExperimentConfig cfg = small_learning(Algorithm::Combined);
    const Trajectory a = run_once(cfg, 1);
    const Trajectory b = run_once(cfg, 1);
    const Trajectory c = run_once(cfg, 2);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].beta_hat == b.samples[i].beta_hat);
      CHECK(a.samples[i].time == b.samples[i].time);
    }
    CHECK(a.final_beta == b.final_beta);
    CHECK(a.final_beta != c.final_beta);
  }

  TEST_CASE("time strictly increases and cost is conserved") {
    for (Algorithm alg : {Algorithm::Wait, Algorithm::Discard, Algorithm::Combined, Algorithm::ZeroWait,
                          Algorithm::MaximumDelay}) {
      const Trajectory t = run_once(small_learning(alg), 0);
      for (std::size_t i = 1; i < t.samples.size(); ++i) CHECK(t.samples[i].time > t.samples[i - 1].time);
      CHECK(t.final_beta * t.final_time == doctest::Approx(t.total_cost).epsilon(1e-12));
      CHECK(t.samples.back().step == t.steps);
      CHECK(t.final_time >= 1.0 + 5000.0);
    }
  }

  TEST_CASE("replication summary") {
    ExperimentConfig cfg = small_learning(Algorithm::Wait);
    const ReplicatedSummary s = run_replicated(cfg);
    REQUIRE(s.runs.size() == 3);
    double mean = 0;
    for (const auto& r : s.runs) mean += r.final_beta / 3.0;
    CHECK(s.final_beta_mean == doctest::Approx(mean).epsilon(1e-14));
    CHECK(s.final_beta_std > 0.0);
    CHECK_FALSE(s.curve.empty());
    CHECK(s.curve.front().step == 0);
    CHECK(s.policy_mean.size() == 200);

    cfg.sim.jobs = 3;
    const ReplicatedSummary parallel = run_replicated(cfg);
    CHECK(parallel.final_beta_mean == s.final_beta_mean);
    for (std::size_t i = 0; i < s.curve.size(); ++i) CHECK(parallel.curve[i].beta_mean == s.curve[i].beta_mean);
  }

  TEST_CASE("one replication has zero spread") {
    ExperimentConfig cfg = small_learning(Algorithm::Wait);
    cfg.sim.replications = 1;
    const ReplicatedSummary s = run_replicated(cfg);
    CHECK(s.final_beta_std == 0.0);
    for (const auto& c : s.curve) CHECK(c.beta_std == 0.0);
  }

  TEST_CASE("policy snapshot covers every learned policy") {
    const Trajectory t = run_once(small_learning(Algorithm::Combined), 0);
    REQUIRE(t.policy.size() == 400);
    CHECK(t.policy.front().kind == ActionKind::Wait);
    CHECK(t.policy.back().kind == ActionKind::Discard);
    for (const auto& p : t.policy) {
      if (p.kind == ActionKind::Wait) {
        CHECK(p.mean_action >= 0.0);
        CHECK(p.mean_action <= 5.0);
      } else {
        CHECK(p.mean_action >= 2.0);
        CHECK(p.mean_action <= 10.0);
      }
    }
  }

  TEST_CASE("abort carries run context") {
    ExperimentConfig cfg = deterministic_zero_wait(100.0);
    cfg.channel = GilbertElliotParams{0.0, 0.0, 5.0, 5.0, 0};
    cfg.agent.algorithm = Algorithm::MaximumDelay;
    cfg.agent.y_max = 4.0;
    cfg.agent.x_max = 4.0;
    try {
      run_once(cfg, 7);
      FAIL("expected an abort");
    } catch (const AbortError& e) {
      CHECK(std::string(e.what()).find("run 7") != std::string::npos);
    }
  }

  TEST_CASE("config validation names the key") {
    ExperimentConfig cfg;
    cfg.agent.x_max = 12.0;
    try {
      validate(cfg);
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "agent.x_max");
    }
    cfg = ExperimentConfig{};
    cfg.sim.replications = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  }

  TEST_CASE("oracle and baseline selection") {
    ExperimentConfig cfg;
    cfg.channel = GilbertElliotParams{0.01, 0.04, 0.5, 1.0, std::nullopt};
    cfg.cost = CostModel{PenaltyBased{IdentityPenalty{}}, 1.0};
    cfg.agent.algorithm = Algorithm::Wait;
    cfg.agent.z_max = 3.0;
    CHECK(oracle_beta(cfg).has_value());
    CHECK(baseline_config(cfg).agent.algorithm == Algorithm::ZeroWait);
    cfg.agent.algorithm = Algorithm::Combined;
    CHECK_FALSE(oracle_beta(cfg).has_value());
    cfg.agent.algorithm = Algorithm::Discard;
    CHECK(baseline_config(cfg).agent.algorithm == Algorithm::MaximumDelay);
    cfg.channel = LognormalParams{};
    CHECK_FALSE(oracle_beta(cfg).has_value());
  }

  TEST_CASE("CSV outputs re-parse under their schema") {
    ExperimentConfig cfg = small_learning(Algorithm::Combined);
    cfg.sim.replications = 2;
    const ReplicatedSummary s = run_replicated(cfg);

    std::stringstream runs;
    write_runs_csv(runs, s);
    const CsvTable t = read_csv(runs);
    CHECK(t.header == std::vector<std::string>{"run_id", "step", "time", "beta_hat"});
    std::size_t expected_rows = 0;
    for (const auto& r : s.runs) expected_rows += r.samples.size();
    REQUIRE(t.rows.size() == expected_rows);
    const auto& last = s.runs.back().samples.back();
    CHECK(std::stod(t.rows.back()[3]) == last.beta_hat);
    CHECK(std::stod(t.rows.back()[2]) == last.time);

    std::stringstream policy;
    write_policy_csv(policy, s);
    const CsvTable p = read_csv(policy);
    CHECK(p.header == std::vector<std::string>{"run_id", "y", "mu", "mean_action", "kind"});
    CHECK(p.rows.size() == 2 * 400);

    std::stringstream summary;
    write_summary_csv(summary, "abc", s, std::nullopt);
    const CsvTable m = read_csv(summary);
    CHECK(m.header ==
          std::vector<std::string>{"config_hash", "final_beta_mean", "final_beta_std", "oracle_beta", "gap_percent"});
    REQUIRE(m.rows.size() == 1);
    CHECK(std::stod(m.rows[0][1]) == s.final_beta_mean);
    CHECK(m.rows[0][3].empty());
    CHECK(m.rows[0][4].empty());

    std::stringstream with_oracle;
    write_summary_csv(with_oracle, "abc", s, 2.0);
    const CsvTable o = read_csv(with_oracle);
    CHECK(std::stod(o.rows[0][4]) == doctest::Approx(100.0 * (s.final_beta_mean - 2.0) / 2.0));

    std::stringstream empirical;
    write_policy_empirical_csv(empirical, s.bins);
    const CsvTable e = read_csv(empirical);
    CHECK(e.rows.size() == ActionBins::kBins);

    std::stringstream curve;
    write_curve_csv(curve, s);
    CHECK(read_csv(curve).rows.size() == s.curve.size());
  }

  TEST_CASE("number formatting round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 2.5e-300, 123456789.125, -7.0}) CHECK(std::stod(format_number(x)) == x);
    CHECK(format_number(2.0) == "2");
  }
}
