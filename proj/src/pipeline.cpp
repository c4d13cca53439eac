#include "ifest/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "ifest/errors.hpp"

namespace ifest {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 step; decorrelates per-realization seeds.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate_config(const PipelineConfig& config) {
  if (!(config.sigma > 0.0)) throw ConfigError("pipeline: sigma must be positive");
  if (config.bin_count < 2) throw ConfigError("pipeline: bin_count must be at least 2");
  if (!(config.penalty >= 0.0 && config.penalty < 1.0))
    throw ConfigError("pipeline: penalty must lie in [0,1)");
  if (config.q_cells < 1) throw ConfigError("pipeline: q_cells must be at least 1");
  if (!(config.outlier_mad_factor > 0.0))
    throw ConfigError("pipeline: outlier factor must be positive");
  if (!(config.cadzow_weight_ratio > 0.0 && config.cadzow_weight_ratio < 1.0))
    throw ConfigError("pipeline: cadzow weight ratio must lie in (0,1)");
}

struct BranchOutput {
  std::vector<IFTrack> tracks;
  Eigen::MatrixXd amps;
};

BranchOutput estimate_branch(const std::vector<CoefficientFrame>& frames,
                             int mode_count, bool use_tlsa, int toeplitz_order,
                             double sample_rate, int* degenerate_frames) {
  std::vector<FrameEstimate> estimates;
  estimates.reserve(frames.size());
  for (const CoefficientFrame& frame : frames) {
    AnnihilatingFilter filter = use_tlsa
                                    ? tlsa_filter(frame, mode_count, toeplitz_order)
                                    : yule_walker(frame, mode_count);
    FrameEstimate est;
    est.frame_index = frame.frame_index;
    est.condition = filter.condition;
    RootDiagnostics roots;
    est.freqs = roots_to_freqs(filter, sample_rate, &roots);
    est.degenerate = roots.degenerate;
    est.unit_circle_dev = roots.unit_circle_dev;
    if (!est.degenerate) {
      try {
        est.amps = estimate_amplitudes(frame, est.freqs, sample_rate);
      } catch (const NumericalError&) {
        est.degenerate = true;
      }
    }
    if (est.degenerate && degenerate_frames) ++*degenerate_frames;
    estimates.push_back(std::move(est));
  }
  BranchOutput out;
  out.tracks = track_modes(estimates, mode_count, &out.amps);
  return out;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "cad") return Method::cad;
  if (name == "cad-tlsa") return Method::cad_tlsa;
  if (name == "cad-spline") return Method::cad_spline;
  if (name == "cad-tlsa-spline") return Method::cad_tlsa_spline;
  throw ConfigError("unknown method: " + name +
                    " (expected cad, cad-tlsa, cad-spline or cad-tlsa-spline)");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::cad: return "cad";
    case Method::cad_tlsa: return "cad-tlsa";
    case Method::cad_spline: return "cad-spline";
    case Method::cad_tlsa_spline: return "cad-tlsa-spline";
  }
  return "?";
}

bool method_uses_tlsa(Method method) {
  return method == Method::cad_tlsa || method == Method::cad_tlsa_spline;
}

bool method_uses_spline(Method method) {
  return method == Method::cad_spline || method == Method::cad_tlsa_spline;
}

std::vector<Method> all_methods() {
  return {Method::cad, Method::cad_tlsa, Method::cad_spline, Method::cad_tlsa_spline};
}

std::vector<PipelineResult> run_methods(const SampledSignal& signal, int mode_count,
                                        std::span<const Method> methods,
                                        const PipelineConfig& config) {
  validate_config(config);
  if (mode_count < 1) throw ConfigError("pipeline: mode count must be at least 1");
  if (methods.empty()) throw ConfigError("pipeline: no methods requested");
  if (signal.samples.empty()) throw std::invalid_argument("pipeline: empty signal");

  const double fs = signal.sample_rate;
  const int n_frames = static_cast<int>(signal.samples.size());
  const WindowParams window = WindowParams::gaussian(config.sigma);

  const int m0 = config.m0 > 0 ? config.m0
                               : default_m0(window, fs, config.bin_count);
  const int t_order =
      config.toeplitz_order > 0
          ? config.toeplitz_order
          : default_toeplitz_order(window, fs, mode_count, m0,
                                   config.cadzow_weight_ratio);
  if (t_order < mode_count || t_order > m0)
    throw ConfigError("pipeline: Toeplitz order outside [P, M0]");
  const int margin = config.boundary_margin >= 0
                         ? config.boundary_margin
                         : static_cast<int>(std::ceil(3.0 * config.sigma * fs));

  // Shared stages: transform, slice inversion, Cadzow denoising.
  const InversionOperator inversion = build_inversion(window, fs, config.bin_count, m0);
  const SpectrogramGrid grid =
      spectrogram(stft(signal, window, config.bin_count), window, fs);

  CadzowConfig cadzow_config;
  cadzow_config.toeplitz_order = t_order;
  cadzow_config.sv_ratio_stop = config.cadzow_sv_ratio;
  cadzow_config.max_iters = config.cadzow_max_iters;

  std::vector<CoefficientFrame> denoised;
  denoised.reserve(n_frames);
  std::vector<CadzowDiagnostics> diagnostics;
  double total_iterations = 0.0;
  for (int n = 0; n < n_frames; ++n) {
    CadzowDiagnostics diag;
    denoised.push_back(cadzow(invert_slice(inversion, grid.values.row(n), n),
                              mode_count, cadzow_config, &diag));
    total_iterations += diag.iterations;
    if (config.collect_cadzow_diagnostics) diagnostics.push_back(std::move(diag));
  }

  const bool want_yw = std::any_of(methods.begin(), methods.end(),
                                   [](Method m) { return !method_uses_tlsa(m); });
  const bool want_tlsa = std::any_of(methods.begin(), methods.end(),
                                     [](Method m) { return method_uses_tlsa(m); });
  int degenerate_yw = 0, degenerate_tlsa = 0;
  BranchOutput yw, tlsa;
  if (want_yw)
    yw = estimate_branch(denoised, mode_count, false, t_order, fs, &degenerate_yw);
  if (want_tlsa)
    tlsa = estimate_branch(denoised, mode_count, true, t_order, fs, &degenerate_tlsa);

  RefineConfig refine_config;
  refine_config.outliers.mad_factor = config.outlier_mad_factor;
  refine_config.q_cells = config.q_cells;
  refine_config.penalty = config.penalty;
  refine_config.inflection_smooth_width = config.inflection_smooth_width;

  std::vector<PipelineResult> results;
  results.reserve(methods.size());
  for (Method method : methods) {
    const BranchOutput& branch = method_uses_tlsa(method) ? tlsa : yw;
    PipelineResult result;
    result.method = method;
    result.m0 = m0;
    result.toeplitz_order = t_order;
    result.boundary_margin = margin;
    result.degenerate_frames = method_uses_tlsa(method) ? degenerate_tlsa : degenerate_yw;
    result.mean_cadzow_iterations = total_iterations / n_frames;
    if (config.collect_cadzow_diagnostics) result.cadzow_diagnostics = diagnostics;

    for (int p = 0; p < mode_count; ++p) {
      ModeOutput mode;
      mode.raw = branch.tracks[p];
      mode.amps.assign(branch.amps.col(p).data(), branch.amps.col(p).data() + n_frames);
      if (method_uses_spline(method)) {
        try {
          RefineResult refined =
              refine_track(mode.raw, refine_config, n_frames);
          mode.cleaned = std::move(refined.cleaned);
          mode.filled = std::move(refined.filled);
          mode.points = std::move(refined.points);
          mode.spline = std::move(refined.spline);
          mode.refined = std::move(refined.refined);
        } catch (const NumericalError& err) {
          mode.refine_failed = true;
          mode.failure = err.what();
          mode.refined = mode.raw.values;
        }
      } else {
        mode.refined = mode.raw.values;
      }
      result.modes.push_back(std::move(mode));
    }
    results.push_back(std::move(result));
  }
  return results;
}

PipelineResult run_algorithm1(const SampledSignal& signal, int mode_count,
                              Method method, const PipelineConfig& config) {
  const Method methods[] = {method};
  return run_methods(signal, mode_count, methods, config)[0];
}

double normalized_l2_error(std::span<const double> estimate,
                           std::span<const double> truth, int margin) {
  if (estimate.size() != truth.size())
    throw std::invalid_argument("normalized_l2_error: length mismatch");
  if (margin < 0) throw std::invalid_argument("normalized_l2_error: negative margin");
  const int n = static_cast<int>(estimate.size());
  const int lo = margin, hi = n - margin;
  if (lo >= hi) throw std::invalid_argument("normalized_l2_error: empty retained range");
  double acc = 0.0;
  for (int i = lo; i < hi; ++i) {
    const double d = estimate[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc) / static_cast<double>(hi - lo);
}

double normalized_l2_error(std::span<const double> estimate, double truth,
                           int margin) {
  std::vector<double> constant(estimate.size(), truth);
  return normalized_l2_error(estimate, constant, margin);
}

double ErrorReport::mean_error(Method method, double sigma, int mode) const {
  double acc = 0.0;
  int count = 0;
  for (const ErrorRecord& rec : records) {
    if (rec.method == method && rec.sigma == sigma && rec.mode == mode) {
      acc += rec.error;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("ErrorReport: no matching records");
  return acc / count;
}

ErrorReport sweep(const SignalSpec& spec, const SweepConfig& config) {
  if (config.realizations < 1) throw ConfigError("sweep: needs at least one realization");
  if (config.sigmas.empty()) throw ConfigError("sweep: empty sigma grid");
  if (config.methods.empty()) throw ConfigError("sweep: no methods requested");

  const SampledSignal clean = synthesize(spec);
  const int mode_count = static_cast<int>(spec.modes.size());
  const int n = spec.sample_count;

  // One noise draw per realization, shared across methods and sigmas.
  std::vector<SampledSignal> noisy;
  noisy.reserve(config.realizations);
  for (int r = 0; r < config.realizations; ++r)
    noisy.push_back(add_noise(clean, config.snr_db, mix_seed(config.seed, r)));

  std::vector<std::vector<double>> truth(mode_count, std::vector<double>(n));
  for (int p = 0; p < mode_count; ++p)
    for (int i = 0; i < n; ++i)
      truth[p][i] = spec.modes[p].inst_freq(static_cast<double>(i) / n);

  ErrorReport report;
  report.methods = config.methods;
  report.sigmas = config.sigmas;
  report.snr_db = config.snr_db;
  report.realizations = config.realizations;
  report.mode_count = mode_count;

  for (double sigma : config.sigmas) {
    PipelineConfig run_config = config.base;
    run_config.sigma = sigma;
    for (int r = 0; r < config.realizations; ++r) {
      const std::vector<PipelineResult> results =
          run_methods(noisy[r], mode_count, config.methods, run_config);
      for (const PipelineResult& result : results) {
        for (int p = 0; p < mode_count; ++p) {
          ErrorRecord rec;
          rec.method = result.method;
          rec.sigma = sigma;
          rec.snr_db = config.snr_db;
          rec.realization = r;
          rec.mode = p;
          rec.error = normalized_l2_error(result.modes[p].refined, truth[p],
                                          result.boundary_margin);
          report.records.push_back(rec);
        }
      }
    }
  }
  return report;
}

}  // namespace ifest
