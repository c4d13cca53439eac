#include "ifest/config.hpp"

#include <fstream>
#include <istream>

#include <json.hpp>

#include "ifest/errors.hpp"

namespace ifest {

namespace {

using nlohmann::json;

SignalSpec parse_signal(const json& node) {
  SignalSpec spec;
  spec.sample_count = node.value("sample_count", 1024);
  if (!node.contains("modes") || !node["modes"].is_array() || node["modes"].empty())
    throw ConfigError("config: signal.modes must be a non-empty array");
  for (const json& mode : node["modes"]) {
    const double amplitude = mode.value("amplitude", 1.0);
    if (!mode.contains("if_poly"))
      throw ConfigError("config: each mode needs if_poly coefficients");
    std::vector<double> coeffs = mode["if_poly"].get<std::vector<double>>();
    if (coeffs.empty()) throw ConfigError("config: if_poly must not be empty");
    spec.modes.push_back(
        polynomial_mode(amplitude, std::move(coeffs), mode.value("phase_offset", 0.0)));
  }
  return spec;
}

void parse_pipeline(const json& node, PipelineConfig& cfg, Method& method) {
  if (node.contains("method")) method = parse_method(node["method"].get<std::string>());
  cfg.sigma = node.value("sigma", cfg.sigma);
  cfg.bin_count = node.value("bin_count", cfg.bin_count);
  cfg.m0 = node.value("m0", cfg.m0);
  cfg.toeplitz_order = node.value("toeplitz_order", cfg.toeplitz_order);
  cfg.cadzow_weight_ratio = node.value("cadzow_weight_ratio", cfg.cadzow_weight_ratio);
  cfg.cadzow_sv_ratio = node.value("cadzow_sv_ratio", cfg.cadzow_sv_ratio);
  cfg.cadzow_max_iters = node.value("cadzow_max_iters", cfg.cadzow_max_iters);
  cfg.q_cells = node.value("q_cells", cfg.q_cells);
  cfg.penalty = node.value("penalty", cfg.penalty);
  cfg.outlier_mad_factor = node.value("outlier_mad_factor", cfg.outlier_mad_factor);
  cfg.inflection_smooth_width =
      node.value("inflection_smooth_width", cfg.inflection_smooth_width);
  cfg.boundary_margin = node.value("boundary_margin", cfg.boundary_margin);
}

}  // namespace

SampledSignal RunConfig::make_signal() const {
  return add_noise(synthesize(signal), snr_db, seed);
}

SweepConfig RunConfig::make_sweep() const {
  SweepConfig sweep;
  sweep.methods = sweep_methods;
  sweep.sigmas = sweep_sigmas.empty() ? default_sigma_grid() : sweep_sigmas;
  sweep.snr_db = snr_db;
  sweep.realizations = sweep_realizations;
  sweep.seed = seed;
  sweep.base = pipeline;
  return sweep;
}

RunConfig load_run_config(std::istream& is) {
  json root;
  try {
    root = json::parse(is);
  } catch (const json::exception& err) {
    throw ConfigError(std::string("config: invalid JSON: ") + err.what());
  }
  if (!root.contains("schema_version") || root["schema_version"].get<int>() != 1)
    throw ConfigError("config: missing or unsupported schema_version (expected 1)");
  if (!root.contains("signal")) throw ConfigError("config: missing signal section");

  RunConfig cfg;
  try {
    cfg.signal = parse_signal(root["signal"]);
    if (root.contains("noise")) {
      const json& noise = root["noise"];
      cfg.snr_db = noise.value("snr_db", cfg.snr_db);
      cfg.seed = noise.value("seed", cfg.seed);
    }
    if (root.contains("pipeline")) parse_pipeline(root["pipeline"], cfg.pipeline, cfg.method);
    if (root.contains("sweep")) {
      const json& sweep = root["sweep"];
      if (sweep.contains("methods")) {
        cfg.sweep_methods.clear();
        for (const json& name : sweep["methods"])
          cfg.sweep_methods.push_back(parse_method(name.get<std::string>()));
      }
      if (sweep.contains("sigmas")) {
        cfg.sweep_sigmas = sweep["sigmas"].get<std::vector<double>>();
      } else if (sweep.contains("sigma_min")) {
        const double lo = sweep["sigma_min"].get<double>();
        const double hi = sweep.value("sigma_max", lo);
        const int count = sweep.value("sigma_count", 1);
        if (count < 1 || (count > 1 && !(hi > lo)))
          throw ConfigError("config: bad sigma range");
        for (int i = 0; i < count; ++i)
          cfg.sweep_sigmas.push_back(
              count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
      }
      cfg.sweep_realizations = sweep.value("realizations", cfg.sweep_realizations);
    }
  } catch (const json::exception& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  return cfg;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return load_run_config(in);
}

RunConfig config_from_scenario(const Scenario& scenario) {
  RunConfig cfg;
  cfg.signal = scenario.signal;
  cfg.pipeline.sigma = scenario.sigma;
  cfg.pipeline.penalty = scenario.penalty;
  cfg.pipeline.q_cells = scenario.q_cells;
  return cfg;
}

std::vector<double> default_sigma_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 17; ++i) grid.push_back(0.01 + 0.04 * i / 16.0);
  return grid;
}

}  // namespace ifest
