#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aoipg/channel.hpp"
#include "aoipg/checks.hpp"
#include "aoipg/config.hpp"
#include "aoipg/errors.hpp"
#include "aoipg/oracle.hpp"
#include "aoipg/sim.hpp"

namespace py = pybind11;
using namespace aoipg;

namespace {

py::array_t<double> vector_of(py::ssize_t n) { return py::array_t<double>(std::vector<py::ssize_t>{n}); }

ExperimentConfig config_from(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(doc);
}

const GilbertElliotParams& ge_channel(const ExperimentConfig& cfg) {
  const auto* ge = std::get_if<GilbertElliotParams>(&cfg.channel);
  if (ge == nullptr || cfg.backward) throw ConfigError("channel.kind", "the oracle needs a one-way gilbert_elliot channel");
  return *ge;
}

py::dict run(const std::string& text, std::optional<std::uint64_t> seed, int jobs) {
  ExperimentConfig cfg = config_from(text);
  if (seed) cfg.sim.master_seed = *seed;
  cfg.sim.jobs = jobs;
  validate(cfg);
  ReplicatedSummary s;
  {
    py::gil_scoped_release release;
    s = run_replicated(cfg);
  }
  py::array_t<double> final_beta = vector_of(static_cast<py::ssize_t>(s.runs.size()));
  auto fb = final_beta.mutable_unchecked<1>();
  for (std::size_t i = 0; i < s.runs.size(); ++i) fb(i) = s.runs[i].final_beta;

  const auto n = static_cast<py::ssize_t>(s.curve.size());
  py::array_t<double> time = vector_of(n), beta = vector_of(n), beta_std = vector_of(n);
  auto t = time.mutable_unchecked<1>();
  auto b = beta.mutable_unchecked<1>();
  auto bs = beta_std.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    t(i) = s.curve[i].time_mean;
    b(i) = s.curve[i].beta_mean;
    bs(i) = s.curve[i].beta_std;
  }

  const auto m = static_cast<py::ssize_t>(s.policy_mean.size());
  py::array_t<double> py_y = vector_of(m), py_action = vector_of(m);
  auto py_yv = py_y.mutable_unchecked<1>();
  auto py_av = py_action.mutable_unchecked<1>();
  py::list kinds;
  for (py::ssize_t i = 0; i < m; ++i) {
    py_yv(i) = s.policy_mean[i].y;
    py_av(i) = s.policy_mean[i].mean_action;
    kinds.append(to_string(s.policy_mean[i].kind));
  }

  py::dict out;
  out["config_hash"] = config_hash(cfg);
  out["final_beta_mean"] = s.final_beta_mean;
  out["final_beta_std"] = s.final_beta_std;
  out["final_beta"] = final_beta;
  out["curve"] = py::dict(py::arg("time") = time, py::arg("beta") = beta, py::arg("beta_std") = beta_std);
  out["policy"] = py::dict(py::arg("y") = py_y, py::arg("mean_action") = py_action, py::arg("kind") = kinds);
  out["oracle_beta"] = oracle_beta(cfg);
  return out;
}

py::dict oracle_wait(const std::string& text) {
  const ExperimentConfig cfg = config_from(text);
  const GilbertElliotParams& ge = ge_channel(cfg);
  const GeWaitSolution sol =
      ge_wait_optimize(GeWaitProblem{ge.p, ge.q, ge.y0, ge.y1, cfg.agent.z_max, cfg.cost, ge.initial_state.value_or(0)});
  return py::dict(py::arg("z0") = sol.z0, py::arg("z1") = sol.z1, py::arg("beta") = sol.beta);
}

py::dict oracle_discard(const std::string& text, std::uint64_t attempts) {
  const ExperimentConfig cfg = config_from(text);
  const GilbertElliotParams& ge = ge_channel(cfg);
  const GeDiscardProblem prob{ge.p, ge.q, ge.y0, ge.y1, cfg.agent.x_min, cfg.agent.x_max, cfg.cost, attempts,
                              cfg.sim.master_seed};
  GeDiscardSolution sol;
  {
    py::gil_scoped_release release;
    sol = ge_discard_optimize(prob);
  }
  return py::dict(py::arg("x0") = sol.x0, py::arg("beta") = sol.beta, py::arg("max_delay_beta") = sol.max_delay_beta);
}

template <class Process>
py::array_t<double> draw(Process process, py::ssize_t n) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  py::array_t<double> out = vector_of(n);
  auto v = out.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) v(i) = process.next();
  return out;
}

}  // namespace

PYBIND11_MODULE(_aoipg, m) {
  m.doc() = "Policy-gradient agents for age-of-information under random delays";

  auto base_config = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<AbortError>(m, "AbortError", PyExc_RuntimeError);
  (void)base_config;

  m.def("derive_seed", &derive_seed, py::arg("master_seed"), py::arg("run_index"));
  m.def("eta_from_rho", &eta_from_rho, py::arg("rho"));
  m.def("rho_label", &rho_label, py::arg("eta"));
  m.def("lognormal_lag1_correlation", &lognormal_lag1_correlation, py::arg("sigma_d"), py::arg("eta"));

  m.def(
      "sample_lognormal",
      [](double sigma_d, double eta, py::ssize_t n, std::uint64_t seed, double mean_scale) {
        return draw(LognormalMarkovDelay(LognormalParams{sigma_d, eta, mean_scale}, seed), n);
      },
      py::arg("sigma_d"), py::arg("eta"), py::arg("n"), py::arg("seed"), py::arg("mean_scale") = 1.0);
  m.def(
      "sample_gilbert_elliot",
      [](double p, double q, double y0, double y1, py::ssize_t n, std::uint64_t seed) {
        return draw(GilbertElliotDelay(GilbertElliotParams{p, q, y0, y1, std::nullopt}, seed), n);
      },
      py::arg("p"), py::arg("q"), py::arg("y0"), py::arg("y1"), py::arg("n"), py::arg("seed"));

  m.def("resolve_config", [](const std::string& text) { return to_json(config_from(text)).dump(); },
        py::arg("config_json"));
  m.def("run", &run, py::arg("config_json"), py::arg("seed") = std::nullopt, py::arg("jobs") = 1);
  m.def("oracle_wait", &oracle_wait, py::arg("config_json"));
  m.def("oracle_discard", &oracle_discard, py::arg("config_json"), py::arg("attempts") = 10'000'000);
  m.def(
      "run_checks",
      [](std::uint64_t seed) {
        py::list out;
        for (const CheckResult& r : run_checks(seed)) {
          out.append(py::dict(py::arg("name") = r.name, py::arg("passed") = r.passed, py::arg("detail") = r.detail,
                              py::arg("seconds") = r.seconds));
        }
        return out;
      },
      py::arg("seed") = 1);
}
