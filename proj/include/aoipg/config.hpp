#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoipg/sim.hpp"

namespace aoipg {

/// Reads an experiment document with sections {channel, cost, agent, sim}.
/// Omitted keys take their defaults; unknown keys and invalid values raise
/// ConfigError naming the dotted key.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses a JSON file; ConfigError("config", ...) names the path on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Every effective parameter, defaults included.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// FNV-1a 64 of the compact resolved JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct SweepSpec {
  std::string axis;
  std::vector<double> values;
};

/// Reads the top-level "sweep" section: {"axis": name, "values": [...]}.
SweepSpec parse_sweep(const nlohmann::json& doc);

/// Axes: rho (sets eta through the correlation label), eta, sigma_d, f,
/// backward_mean, p, q, y0, y1, a_th, gamma, z_max, x_min, sigma, alpha_theta.
ExperimentConfig apply_sweep_value(ExperimentConfig cfg, const std::string& axis, double value);

}  // namespace aoipg
