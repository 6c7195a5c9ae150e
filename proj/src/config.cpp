#include "aoipg/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "aoipg/errors.hpp"

namespace aoipg {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json& section(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw ConfigError(path.empty() ? "config" : path, "expected a JSON object");
  return doc;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!names.contains(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const json& obj, const std::string& path, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_float() && v.get<double>() >= 0.0 && v.get<double>() == std::floor(v.get<double>())) {
    return static_cast<std::uint64_t>(v.get<double>());
  }
  throw ConfigError(join(path, key), "expected a non-negative integer");
}

std::string get_string(const json& obj, const std::string& path, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

LognormalParams parse_lognormal(const json& obj, const std::string& path, bool allow_kind) {
  section(obj, path);
  if (allow_kind) {
    reject_unknown(obj, path, {"kind", "sigma_d", "eta", "mean_scale", "backward"});
  } else {
    reject_unknown(obj, path, {"sigma_d", "eta", "mean_scale"});
  }
  LognormalParams p;
  p.sigma_d = get_number(obj, path, "sigma_d", p.sigma_d);
  p.eta = get_number(obj, path, "eta", p.eta);
  p.mean_scale = get_number(obj, path, "mean_scale", p.mean_scale);
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return p;
}

void parse_channel(const json& obj, ExperimentConfig& cfg) {
  const std::string path = "channel";
  section(obj, path);
  const std::string kind = get_string(obj, path, "kind", "lognormal");
  if (kind == "lognormal") {
    cfg.channel = parse_lognormal(obj, path, true);
  } else if (kind == "gilbert_elliot") {
    reject_unknown(obj, path, {"kind", "p", "q", "y0", "y1", "initial_state", "backward"});
    GilbertElliotParams p;
    p.p = get_number(obj, path, "p", p.p);
    p.q = get_number(obj, path, "q", p.q);
    p.y0 = get_number(obj, path, "y0", p.y0);
    p.y1 = get_number(obj, path, "y1", p.y1);
    if (obj.contains("initial_state")) p.initial_state = get_int(obj, path, "initial_state", 0);
    try {
      validate(p);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
    cfg.channel = p;
  } else {
    throw ConfigError("channel.kind", "expected lognormal or gilbert_elliot, got '" + kind + "'");
  }
  if (obj.contains("backward")) cfg.backward = parse_lognormal(obj.at("backward"), "channel.backward", false);
}

PenaltyFunction parse_penalty(const json& obj) {
  const std::string path = "cost.penalty";
  section(obj, path);
  reject_unknown(obj, path, {"kind", "gamma", "eta"});
  const std::string kind = get_string(obj, path, "kind", "identity");
  PenaltyFunction penalty;
  if (kind == "identity") {
    penalty = IdentityPenalty{};
  } else if (kind == "power") {
    penalty = PowerPenalty{get_number(obj, path, "gamma", 1.0)};
  } else if (kind == "exponential") {
    penalty = ExponentialPenalty{get_number(obj, path, "gamma", 1.0)};
  } else if (kind == "step") {
    penalty = StepPenalty{get_number(obj, path, "gamma", 1.0)};
  } else if (kind == "scaled_exp") {
    penalty = ScaledExpPenalty{get_number(obj, path, "eta", 1.0), get_number(obj, path, "gamma", 1.0)};
  } else {
    throw ConfigError("cost.penalty.kind", "unknown penalty '" + kind + "'");
  }
  try {
    validate(penalty);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return penalty;
}

void parse_cost(const json& obj, ExperimentConfig& cfg) {
  const std::string path = "cost";
  section(obj, path);
  const std::string kind = get_string(obj, path, "kind", "penalty");
  if (kind == "penalty") {
    reject_unknown(obj, path, {"kind", "penalty", "f"});
    PenaltyFunction penalty = IdentityPenalty{};
    if (obj.contains("penalty")) penalty = parse_penalty(obj.at("penalty"));
    cfg.cost.kind = PenaltyBased{penalty};
  } else if (kind == "peak_violation") {
    reject_unknown(obj, path, {"kind", "a_th", "f"});
    const double a_th = get_number(obj, path, "a_th", 1.0);
    if (!(a_th > 0.0)) throw ConfigError("cost.a_th", "must be > 0");
    cfg.cost.kind = PeakViolation{a_th};
  } else {
    throw ConfigError("cost.kind", "expected penalty or peak_violation, got '" + kind + "'");
  }
  cfg.cost.f = get_number(obj, path, "f", 0.0);
  if (!(cfg.cost.f >= 0.0)) throw ConfigError("cost.f", "must be >= 0");
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::Wait, Algorithm::Discard, Algorithm::Combined, Algorithm::ZeroWait,
                      Algorithm::MaximumDelay, Algorithm::FixedTabular}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("agent.algorithm", "unknown algorithm '" + name + "'");
}

void parse_agent(const json& obj, ExperimentConfig& cfg) {
  const std::string path = "agent";
  section(obj, path);
  reject_unknown(obj, path,
                 {"algorithm", "z_max", "x_min", "x_max", "alpha_theta", "alpha_omega", "sigma", "d", "n", "d1",
                  "d2", "y_max", "y_back_max", "table"});
  AgentSpec& a = cfg.agent;
  a.algorithm = parse_algorithm(get_string(obj, path, "algorithm", to_string(a.algorithm)));
  a.y_max = get_number(obj, path, "y_max", a.y_max);
  a.z_max = get_number(obj, path, "z_max", a.z_max);
  a.x_min = get_number(obj, path, "x_min", a.x_min);
  a.x_max = get_number(obj, path, "x_max", a.y_max);
  a.alpha_theta = get_number(obj, path, "alpha_theta", a.alpha_theta);
  a.alpha_omega = get_number(obj, path, "alpha_omega", a.alpha_omega);
  a.sigma = get_number(obj, path, "sigma", a.sigma);
  a.d = get_int(obj, path, "d", a.d);
  a.n = get_int(obj, path, "n", a.n);
  a.d1 = get_int(obj, path, "d1", a.d1);
  a.d2 = get_int(obj, path, "d2", a.d2);
  a.y_back_max = get_number(obj, path, "y_back_max", a.y_back_max);
  if (obj.contains("table")) {
    const json& rows = obj.at("table");
    if (!rows.is_array()) throw ConfigError("agent.table", "expected an array");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string row_path = "agent.table[" + std::to_string(i) + "]";
      section(rows[i], row_path);
      reject_unknown(rows[i], row_path, {"y", "z", "x"});
      if (!rows[i].contains("y")) throw ConfigError(row_path + ".y", "missing");
      TableEntry entry;
      entry.y = get_number(rows[i], row_path, "y", 0.0);
      if (rows[i].contains("z")) entry.z = get_number(rows[i], row_path, "z", 0.0);
      if (rows[i].contains("x")) entry.x = get_number(rows[i], row_path, "x", 0.0);
      a.table.push_back(entry);
    }
  }
}

void parse_sim(const json& obj, ExperimentConfig& cfg) {
  const std::string path = "sim";
  section(obj, path);
  reject_unknown(obj, path, {"horizon", "max_steps", "replications", "master_seed", "record_decimation"});
  SimSpec& s = cfg.sim;
  s.horizon = get_number(obj, path, "horizon", s.horizon);
  s.max_steps = get_u64(obj, path, "max_steps", s.max_steps);
  s.replications = get_int(obj, path, "replications", s.replications);
  s.master_seed = get_u64(obj, path, "master_seed", s.master_seed);
  s.record_decimation = get_int(obj, path, "record_decimation", s.record_decimation);
}

json penalty_json(const PenaltyFunction& penalty) {
  return std::visit(Overloaded{
                        [](const IdentityPenalty&) { return json{{"kind", "identity"}}; },
                        [](const PowerPenalty& p) { return json{{"kind", "power"}, {"gamma", p.gamma}}; },
                        [](const ExponentialPenalty& p) {
                          return json{{"kind", "exponential"}, {"gamma", p.gamma}};
                        },
                        [](const StepPenalty& p) { return json{{"kind", "step"}, {"gamma", p.gamma}}; },
                        [](const ScaledExpPenalty& p) {
                          return json{{"kind", "scaled_exp"}, {"eta", p.eta}, {"gamma", p.gamma}};
                        },
                    },
                    penalty);
}

json lognormal_json(const LognormalParams& p) {
  return json{{"sigma_d", p.sigma_d}, {"eta", p.eta}, {"mean_scale", p.mean_scale}, {"rho_label", rho_label(p.eta)}};
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  section(doc, "");
  reject_unknown(doc, "", {"channel", "cost", "agent", "sim", "sweep"});
  ExperimentConfig cfg;
  if (doc.contains("channel")) parse_channel(doc.at("channel"), cfg);
  if (doc.contains("cost")) parse_cost(doc.at("cost"), cfg);
  if (doc.contains("agent")) parse_agent(doc.at("agent"), cfg);
  if (doc.contains("sim")) parse_sim(doc.at("sim"), cfg);
  validate(cfg);
  return cfg;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

json to_json(const ExperimentConfig& cfg) {
  json channel = std::visit(Overloaded{
                                [](const LognormalParams& p) {
                                  json j = lognormal_json(p);
                                  j["kind"] = "lognormal";
                                  return j;
                                },
                                [](const GilbertElliotParams& p) {
                                  json j{{"kind", "gilbert_elliot"}, {"p", p.p}, {"q", p.q}, {"y0", p.y0}, {"y1", p.y1}};
                                  if (p.initial_state) j["initial_state"] = *p.initial_state;
                                  return j;
                                },
                            },
                            cfg.channel);
  if (cfg.backward) channel["backward"] = lognormal_json(*cfg.backward);

  json cost = std::visit(Overloaded{
                             [](const PenaltyBased& m) { return json{{"kind", "penalty"}, {"penalty", penalty_json(m.penalty)}}; },
                             [](const PeakViolation& m) { return json{{"kind", "peak_violation"}, {"a_th", m.a_th}}; },
                         },
                         cfg.cost.kind);
  cost["f"] = cfg.cost.f;

  const AgentSpec& a = cfg.agent;
  json agent{{"algorithm", to_string(a.algorithm)},
             {"z_max", a.z_max},
             {"x_min", a.x_min},
             {"x_max", a.x_max},
             {"alpha_theta", a.alpha_theta},
             {"alpha_omega", a.alpha_omega},
             {"sigma", a.sigma},
             {"d", a.d},
             {"n", a.n},
             {"d1", a.d1},
             {"d2", a.d2},
             {"y_max", a.y_max},
             {"y_back_max", a.y_back_max}};
  json table = json::array();
  for (const auto& row : a.table) {
    json r{{"y", row.y}};
    if (row.z) r["z"] = *row.z;
    if (row.x) r["x"] = *row.x;
    table.push_back(r);
  }
  agent["table"] = table;

  const SimSpec& s = cfg.sim;
  json sim{{"horizon", s.horizon},
           {"max_steps", s.max_steps},
           {"replications", s.replications},
           {"master_seed", s.master_seed},
           {"record_decimation", s.record_decimation}};
  return json{{"channel", channel}, {"cost", cost}, {"agent", agent}, {"sim", sim}};
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SweepSpec parse_sweep(const json& doc) {
  if (!doc.contains("sweep")) throw ConfigError("sweep", "missing sweep section");
  const json& obj = doc.at("sweep");
  section(obj, "sweep");
  reject_unknown(obj, "sweep", {"axis", "values"});
  SweepSpec spec;
  spec.axis = get_string(obj, "sweep", "axis", "");
  if (spec.axis.empty()) throw ConfigError("sweep.axis", "missing");
  if (!obj.contains("values") || !obj.at("values").is_array()) throw ConfigError("sweep.values", "expected an array");
  for (const auto& v : obj.at("values")) {
    if (!v.is_number()) throw ConfigError("sweep.values", "expected numbers");
    spec.values.push_back(v.get<double>());
  }
  if (spec.values.empty()) throw ConfigError("sweep.values", "empty sweep list");
  // Reject unknown axes before any run starts.
  apply_sweep_value(ExperimentConfig{}, spec.axis, spec.values.front());
  return spec;
}

ExperimentConfig apply_sweep_value(ExperimentConfig cfg, const std::string& axis, double value) {
  auto lognormal = [&]() -> LognormalParams& {
    auto* p = std::get_if<LognormalParams>(&cfg.channel);
    if (p == nullptr) throw ConfigError("sweep.axis", "axis '" + axis + "' needs a lognormal channel");
    return *p;
  };
  auto gilbert = [&]() -> GilbertElliotParams& {
    auto* p = std::get_if<GilbertElliotParams>(&cfg.channel);
    if (p == nullptr) throw ConfigError("sweep.axis", "axis '" + axis + "' needs a gilbert_elliot channel");
    return *p;
  };
  auto penalty_gamma = [&]() -> double& {
    auto* m = std::get_if<PenaltyBased>(&cfg.cost.kind);
    if (m == nullptr) throw ConfigError("sweep.axis", "axis 'gamma' needs a penalty cost");
    return std::visit(Overloaded{
                          [&](IdentityPenalty&) -> double& {
                            throw ConfigError("sweep.axis", "identity penalty has no gamma");
                          },
                          [](PowerPenalty& p) -> double& { return p.gamma; },
                          [](ExponentialPenalty& p) -> double& { return p.gamma; },
                          [](StepPenalty& p) -> double& { return p.gamma; },
                          [](ScaledExpPenalty& p) -> double& { return p.gamma; },
                      },
                      m->penalty);
  };
  if (axis == "rho") {
    if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("sweep.values", "rho must lie in [0, 1]");
    if (std::holds_alternative<LognormalParams>(cfg.channel)) lognormal().eta = eta_from_rho(value);
    else throw ConfigError("sweep.axis", "axis 'rho' needs a lognormal channel");
  } else if (axis == "eta") {
    if (std::holds_alternative<LognormalParams>(cfg.channel)) lognormal().eta = value;
    else throw ConfigError("sweep.axis", "axis 'eta' needs a lognormal channel");
  } else if (axis == "sigma_d") {
    if (std::holds_alternative<LognormalParams>(cfg.channel)) lognormal().sigma_d = value;
    else throw ConfigError("sweep.axis", "axis 'sigma_d' needs a lognormal channel");
  } else if (axis == "f") {
    cfg.cost.f = value;
  } else if (axis == "backward_mean") {
    if (!cfg.backward) cfg.backward = LognormalParams{1.5, eta_from_rho(0.5), 1.0};
    cfg.backward->mean_scale = value;
  } else if (axis == "p" || axis == "q" || axis == "y0" || axis == "y1") {
    if (!std::holds_alternative<GilbertElliotParams>(cfg.channel)) {
      cfg.channel = GilbertElliotParams{0.1, 0.9, 1.0, 10.0, std::nullopt};
    }
    auto& g = gilbert();
    (axis == "p" ? g.p : axis == "q" ? g.q : axis == "y0" ? g.y0 : g.y1) = value;
  } else if (axis == "a_th") {
    auto* m = std::get_if<PeakViolation>(&cfg.cost.kind);
    if (m == nullptr) cfg.cost.kind = PeakViolation{value};
    else m->a_th = value;
  } else if (axis == "gamma") {
    if (!std::holds_alternative<PenaltyBased>(cfg.cost.kind) ||
        std::holds_alternative<IdentityPenalty>(std::get<PenaltyBased>(cfg.cost.kind).penalty)) {
      cfg.cost.kind = PenaltyBased{PowerPenalty{1.0}};
    }
    penalty_gamma() = value;
  } else if (axis == "z_max") {
    cfg.agent.z_max = value;
  } else if (axis == "x_min") {
    cfg.agent.x_min = value;
  } else if (axis == "sigma") {
    cfg.agent.sigma = value;
  } else if (axis == "alpha_theta") {
    cfg.agent.alpha_theta = value;
  } else {
    throw ConfigError("sweep.axis", "unknown sweep axis '" + axis + "'");
  }
  return cfg;
}

}  // namespace aoipg
