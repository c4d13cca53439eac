#pragma once

#include <iosfwd>
#include <limits>
#include <string>

#include "ifest/pipeline.hpp"

namespace ifest {

/// One fully specified run, loadable from a JSON config file (documented
/// schema, schema_version 1): the signal (polynomial-IF modes), optional
/// noise, pipeline parameters and an optional sweep section.
struct RunConfig {
  SignalSpec signal;
  double snr_db = std::numeric_limits<double>::infinity();  // +inf = noiseless
  std::uint64_t seed = 0;
  Method method = Method::cad_spline;
  PipelineConfig pipeline;
  std::vector<Method> sweep_methods = all_methods();
  std::vector<double> sweep_sigmas;
  int sweep_realizations = 10;

  int mode_count() const { return static_cast<int>(signal.modes.size()); }
  SampledSignal make_signal() const;
  SweepConfig make_sweep() const;
};

RunConfig load_run_config(std::istream& is);
RunConfig load_run_config_file(const std::string& path);

/// Seeds a RunConfig from a built-in scenario (its window, penalty and cell
/// defaults included).
RunConfig config_from_scenario(const Scenario& scenario);

/// Default sweep grid when a config does not pin one: 17 sigmas spanning
/// [0.01, 0.05].
std::vector<double> default_sigma_grid();

}  // namespace ifest
