// aoi-pg: run, sweep, oracle and check front end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoipg/checks.hpp"
#include "aoipg/config.hpp"
#include "aoipg/errors.hpp"
#include "aoipg/oracle.hpp"
#include "aoipg/sim.hpp"

namespace fs = std::filesystem;
using namespace aoipg;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level log_level() {
  const char* env = std::getenv("AOI_PG_LOG");
  if (env == nullptr) return Level::Info;
  const std::string v = env;
  if (v == "error") return Level::Error;
  if (v == "debug") return Level::Debug;
  if (v != "info") std::cerr << "aoi-pg: unknown AOI_PG_LOG '" << v << "', using info\n";
  return Level::Info;
}

void log(Level level, const std::string& msg) {
  static const Level threshold = log_level();
  if (level <= threshold) std::cerr << "aoi-pg: " << msg << '\n';
}

// Writes into a staging directory next to the target and renames it into
// place once every file is complete.
class StagedDir {
 public:
  StagedDir(fs::path target, bool force) : target_(std::move(target)), force_(force) {
    if (fs::exists(target_) && !force_) {
      throw ConfigError("--out", "output directory '" + target_.string() + "' exists (use --force to replace it)");
    }
    const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
    fs::create_directories(parent);
    staging_ = parent / (target_.filename().string() + ".staging");
    fs::remove_all(staging_);
    fs::create_directory(staging_);
  }
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;
  ~StagedDir() {
    std::error_code ec;
    if (!committed_) fs::remove_all(staging_, ec);
  }

  std::ofstream open(const std::string& name) const {
    std::ofstream out(staging_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (staging_ / name).string());
    return out;
  }

  void commit() {
    if (fs::exists(target_)) fs::remove_all(target_);
    fs::rename(staging_, target_);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path staging_;
  bool force_;
  bool committed_ = false;
};

void write_plot_scripts(const StagedDir& dir) {
  dir.open("beta_curve.gp") << "set datafile separator ','\n"
                               "set key autotitle columnhead\n"
                               "set xlabel 'time'\nset ylabel 'average cost'\n"
                               "set terminal pngcairo size 900,600\nset output 'beta_curve.png'\n"
                               "plot 'beta_curve.csv' using 2:3 with lines title 'mean', \\\n"
                               "     '' using 2:($3-$4) with lines dt 2 title '-1 std', \\\n"
                               "     '' using 2:($3+$4) with lines dt 2 title '+1 std'\n";
  dir.open("policy.gp") << "set datafile separator ','\n"
                           "set xlabel 'y'\nset ylabel 'action'\n"
                           "set terminal pngcairo size 900,600\nset output 'policy.png'\n"
                           "plot 'policy_empirical.csv' using 1:2 with linespoints title 'wait', \\\n"
                           "     '' using 1:3 with linespoints title 'discard'\n";
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int jobs = 1;
  bool emit_plots = false;
  bool force = false;
};

ExperimentConfig load_with_overrides(const RunArgs& args, const nlohmann::json& doc) {
  ExperimentConfig cfg = parse_config(doc);
  if (args.seed) cfg.sim.master_seed = *args.seed;
  cfg.sim.jobs = args.jobs;
  validate(cfg);
  return cfg;
}

int cmd_run(const RunArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args, read_json_file(args.config));
  StagedDir dir(args.out, args.force);
  const std::string hash = config_hash(cfg);
  log(Level::Info, "run " + std::string(to_string(cfg.agent.algorithm)) + ", " + std::to_string(cfg.sim.replications) +
                       " replications, config " + hash);

  const ReplicatedSummary summary = run_replicated(cfg);
  const std::optional<double> oracle = oracle_beta(cfg);
  log(Level::Info, "final beta mean " + format_number(summary.final_beta_mean) + " std " +
                       format_number(summary.final_beta_std) +
                       (oracle ? ", oracle " + format_number(*oracle) : std::string()));
  for (const auto& run : summary.runs) {
    log(Level::Debug, "run " + std::to_string(run.run_index) + ": beta " + format_number(run.final_beta) + ", " +
                          std::to_string(run.steps) + " steps, " + std::to_string(run.attempts) + " attempts");
  }

  {
    auto out = dir.open("runs.csv");
    write_runs_csv(out, summary);
  }
  {
    auto out = dir.open("policy.csv");
    write_policy_csv(out, summary);
  }
  {
    auto out = dir.open("summary.csv");
    write_summary_csv(out, hash, summary, oracle);
  }
  {
    auto out = dir.open("policy_empirical.csv");
    write_policy_empirical_csv(out, summary.bins);
  }
  {
    auto out = dir.open("beta_curve.csv");
    write_curve_csv(out, summary);
  }
  dir.open("config.resolved.json") << to_json(cfg).dump(2) << '\n';
  if (args.emit_plots) write_plot_scripts(dir);
  dir.commit();
  log(Level::Info, "wrote " + args.out);
  return 0;
}

int cmd_sweep(const RunArgs& args) {
  const nlohmann::json doc = read_json_file(args.config);
  const ExperimentConfig base = load_with_overrides(args, doc);
  const SweepSpec sweep = parse_sweep(doc);
  std::vector<ExperimentConfig> points;
  for (double v : sweep.values) {
    ExperimentConfig cfg = apply_sweep_value(base, sweep.axis, v);
    try {
      validate(cfg);
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), std::string("at sweep value ") + format_number(v) + ": " + e.what());
    }
    points.push_back(std::move(cfg));
  }
  StagedDir dir(args.out, args.force);
  auto out = dir.open("sweep.csv");
  out << "axis_value,final_beta_mean,final_beta_std,oracle_beta,baseline_beta\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    log(Level::Info, "sweep " + sweep.axis + " = " + format_number(sweep.values[i]));
    const ReplicatedSummary summary = run_replicated(points[i]);
    const std::optional<double> oracle = oracle_beta(points[i]);
    const ExperimentConfig baseline = baseline_config(points[i]);
    double baseline_beta = summary.final_beta_mean;
    if (baseline.agent.algorithm != points[i].agent.algorithm) baseline_beta = run_replicated(baseline).final_beta_mean;
    out << format_number(sweep.values[i]) << ',' << format_number(summary.final_beta_mean) << ','
        << format_number(summary.final_beta_std) << ',' << (oracle ? format_number(*oracle) : std::string()) << ','
        << format_number(baseline_beta) << '\n';
  }
  out.close();
  nlohmann::json resolved = to_json(base);
  resolved["sweep"] = {{"axis", sweep.axis}, {"values", sweep.values}};
  dir.open("config.resolved.json") << resolved.dump(2) << '\n';
  if (args.emit_plots) {
    dir.open("sweep.gp") << "set datafile separator ','\n"
                            "set xlabel '" << sweep.axis << "'\nset ylabel 'average cost'\n"
                            "set terminal pngcairo size 900,600\nset output 'sweep.png'\n"
                            "plot 'sweep.csv' using 1:2:3 with yerrorlines title 'learned', \\\n"
                            "     '' using 1:5 with linespoints title 'baseline', \\\n"
                            "     '' using 1:4 with linespoints title 'optimum'\n";
  }
  dir.commit();
  log(Level::Info, "wrote " + args.out);
  return 0;
}

struct OracleArgs {
  std::string problem;
  std::string config;
  std::string out;
  std::uint64_t attempts = 10'000'000;
};

int cmd_oracle(const OracleArgs& args) {
  const ExperimentConfig cfg = load_config(args.config);
  const auto* ge = std::get_if<GilbertElliotParams>(&cfg.channel);
  if (ge == nullptr) throw ConfigError("channel.kind", "the oracle needs a gilbert_elliot channel");
  std::ostringstream row;
  if (args.problem == "ge-wait") {
    const GeWaitProblem prob{ge->p, ge->q, ge->y0, ge->y1, cfg.agent.z_max, cfg.cost, ge->initial_state.value_or(0)};
    const GeWaitSolution sol = ge_wait_optimize(prob);
    row << "z0,z1,beta\n" << format_number(sol.z0) << ',' << format_number(sol.z1) << ',' << format_number(sol.beta) << '\n';
  } else {
    GeDiscardProblem prob{ge->p, ge->q, ge->y0, ge->y1, cfg.agent.x_min, cfg.agent.x_max, cfg.cost, args.attempts,
                          cfg.sim.master_seed};
    try {
      validate(prob);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("channel", e.what());
    }
    const GeDiscardSolution sol = ge_discard_optimize(prob);
    row << "x0,beta,max_delay_beta\n"
        << format_number(sol.x0) << ',' << format_number(sol.beta) << ',' << format_number(sol.max_delay_beta) << '\n';
  }
  std::cout << row.str();
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + args.out);
    out << row.str();
  }
  return 0;
}

int cmd_check(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : run_checks(seed)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " (" << format_number(r.seconds)
              << " s)\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config, "experiment JSON")->required();
  cmd->add_option("--seed", args.seed, "override sim.master_seed");
  cmd->add_option("--out", args.out, "output directory")->capture_default_str();
  cmd->add_option("--jobs", args.jobs, "parallel replications")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--emit-plots", args.emit_plots, "write gnuplot scripts next to the CSVs");
  cmd->add_flag("--force", args.force, "replace an existing output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information policy-gradient simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run replicated learning experiments");
  add_run_options(run, run_args);

  RunArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "repeat a run over the values of one parameter");
  add_run_options(sweep, sweep_args);

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "optimal constant policies on a Gilbert-Elliot channel");
  oracle->add_option("problem", oracle_args.problem, "ge-wait or ge-discard")
      ->required()
      ->check(CLI::IsMember({"ge-wait", "ge-discard"}));
  oracle->add_option("--config", oracle_args.config, "experiment JSON")->required();
  oracle->add_option("--out", oracle_args.out, "also write the CSV row to this file");
  oracle->add_option("--attempts", oracle_args.attempts, "replayed attempts for ge-discard")->capture_default_str();

  std::uint64_t check_seed = 1;
  auto* check = app.add_subcommand("check", "fast invariant suite");
  check->add_option("--seed", check_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*oracle) return cmd_oracle(oracle_args);
    if (*check) return cmd_check(check_seed);
  } catch (const ConfigError& e) {
    std::cerr << "aoi-pg: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const AbortError& e) {
    std::cerr << "aoi-pg: aborted: " << e.what() << '\n';
    return kExitAbort;
  } catch (const std::exception& e) {
    std::cerr << "aoi-pg: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
