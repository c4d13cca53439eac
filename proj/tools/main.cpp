#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "ifest/config.hpp"
#include "ifest/errors.hpp"
#include "ifest/io.hpp"

namespace {

using namespace ifest;

RunConfig resolve_config(const std::string& config_path, const std::string& scenario,
                         double snr_override, bool has_snr, std::uint64_t seed_override,
                         bool has_seed) {
  RunConfig cfg;
  if (!config_path.empty()) {
    cfg = load_run_config_file(config_path);
  } else if (!scenario.empty()) {
    cfg = config_from_scenario(scenario_by_name(scenario));
  } else {
    throw ConfigError("either --config or --scenario is required");
  }
  if (has_snr) cfg.snr_db = snr_override;
  if (has_seed) cfg.seed = seed_override;
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instantaneous-frequency estimation for interfering modes "
               "(Prony on the spectrogram, Cadzow/TLSA denoising, spline refinement)"};
  app.require_subcommand(1);

  std::string config_path, scenario, output, method_override;
  double snr = 0.0;
  std::uint64_t seed = 0;

  auto add_input_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option("--scenario", scenario,
                    "built-in scenario: tones|parallel-chirps|general-chirps (or a|b|c)");
    cmd->add_option("--snr", snr, "override SNR in dB (omit for noiseless)");
    cmd->add_option("--seed", seed, "override noise seed");
  };

  CLI::App* generate = app.add_subcommand("generate", "emit a signal as CSV");
  add_input_options(generate);
  generate->add_option("-o,--output", output, "output CSV path")->required();

  CLI::App* estimate = app.add_subcommand("estimate", "run one estimation, emit IF tracks");
  add_input_options(estimate);
  estimate->add_option("--method", method_override,
                       "cad|cad-tlsa|cad-spline|cad-tlsa-spline");
  estimate->add_option("-o,--output", output, "raw tracks CSV path")->required();
  std::string refined_path, points_path, spec_csv_path, spec_pgm_path, cadzow_diag_path;
  estimate->add_option("--refined", refined_path, "refined IF CSV path");
  estimate->add_option("--points", points_path, "detection point sets CSV path");
  estimate->add_option("--spectrogram-csv", spec_csv_path, "spectrogram CSV path");
  estimate->add_option("--spectrogram-pgm", spec_pgm_path, "spectrogram PGM image path");
  estimate->add_option("--cadzow-diag", cadzow_diag_path,
                       "per-frame Cadzow diagnostics CSV path");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run the sigma/SNR sweep, emit errors");
  add_input_options(sweep_cmd);
  sweep_cmd->add_option("-o,--output", output, "error report CSV path")->required();

  CLI::App* plot = app.add_subcommand("plot", "render an error report as an SVG chart");
  std::string report_path;
  int plot_mode = 1;
  plot->add_option("--report", report_path, "error report CSV")->required();
  plot->add_option("--mode", plot_mode, "1-based mode index");
  plot->add_option("-o,--output", output, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      RunConfig cfg = resolve_config(config_path, scenario, snr, generate->count("--snr") > 0,
                                     seed, generate->count("--seed") > 0);
      auto out = open_output(output);
      write_signal_csv(out, cfg.make_signal());
    } else if (estimate->parsed()) {
      RunConfig cfg = resolve_config(config_path, scenario, snr, estimate->count("--snr") > 0,
                                     seed, estimate->count("--seed") > 0);
      if (!method_override.empty()) cfg.method = parse_method(method_override);
      cfg.pipeline.collect_cadzow_diagnostics = !cadzow_diag_path.empty();
      const SampledSignal signal = cfg.make_signal();
      const PipelineResult result =
          run_algorithm1(signal, cfg.mode_count(), cfg.method, cfg.pipeline);
      auto out = open_output(output);
      write_tracks_csv(out, result);
      if (!refined_path.empty()) {
        auto refined = open_output(refined_path);
        write_refined_csv(refined, result);
      }
      if (!points_path.empty()) {
        auto points = open_output(points_path);
        write_points_csv(points, result);
      }
      if (!spec_csv_path.empty() || !spec_pgm_path.empty()) {
        const WindowParams window = WindowParams::gaussian(cfg.pipeline.sigma);
        const SpectrogramGrid grid = spectrogram(
            stft(signal, window, cfg.pipeline.bin_count), window, signal.sample_rate);
        if (!spec_csv_path.empty()) {
          auto spec = open_output(spec_csv_path);
          write_spectrogram_csv(spec, grid);
        }
        if (!spec_pgm_path.empty()) {
          auto spec = open_output(spec_pgm_path);
          write_spectrogram_pgm(spec, grid);
        }
      }
      if (!cadzow_diag_path.empty()) {
        auto diag = open_output(cadzow_diag_path);
        write_cadzow_diagnostics_csv(diag, result);
      }
      for (const ModeOutput& mode : result.modes)
        if (mode.refine_failed)
          std::cerr << "warning: refinement failed for mode " << mode.raw.mode_index + 1
                    << ": " << mode.failure << '\n';
    } else if (sweep_cmd->parsed()) {
      RunConfig cfg = resolve_config(config_path, scenario, snr, sweep_cmd->count("--snr") > 0,
                                     seed, sweep_cmd->count("--seed") > 0);
      const ErrorReport report = sweep(cfg.signal, cfg.make_sweep());
      auto out = open_output(output);
      write_error_report_csv(out, report);
    } else if (plot->parsed()) {
      std::ifstream in(report_path);
      if (!in) throw ConfigError("cannot open report: " + report_path);
      const ErrorReport report = read_error_report_csv(in);
      auto out = open_output(output);
      write_error_svg(out, report, plot_mode);
    }
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 3;
  }
  return 0;
}
