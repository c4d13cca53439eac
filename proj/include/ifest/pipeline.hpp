#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ifest/cadzow.hpp"
#include "ifest/refine.hpp"
#include "ifest/signal.hpp"

namespace ifest {

/// The four estimation variants: Cadzow-denoised Yule-Walker or TLSA,
/// each with or without the spline oscillation-removal stage.
enum class Method { cad, cad_tlsa, cad_spline, cad_tlsa_spline };

Method parse_method(const std::string& name);  // throws ConfigError
std::string method_name(Method method);
bool method_uses_tlsa(Method method);
bool method_uses_spline(Method method);
std::vector<Method> all_methods();

struct PipelineConfig {
  double sigma = 0.02;
  int bin_count = 512;
  int m0 = 0;              // 0 = derive from the window (weight ratio 1e-8)
  int toeplitz_order = 0;  // 0 = derive from the window (cadzow_weight_ratio)
  double cadzow_weight_ratio = 0.1;
  double cadzow_sv_ratio = 1e-3;
  int cadzow_max_iters = 30;
  int q_cells = 10;
  double penalty = 1.0 - 1e-4;
  double outlier_mad_factor = 8.0;
  int inflection_smooth_width = 5;
  int boundary_margin = -1;  // frames excluded from scoring; -1 = ceil(3 sigma F_s)
  bool collect_cadzow_diagnostics = false;
};

struct ModeOutput {
  IFTrack raw;                  // tracked per-frame estimates (mask = degenerate)
  std::vector<double> amps;     // matching amplitude estimates
  std::vector<double> refined;  // spline output; equals raw.values without spline
  IFTrack cleaned;              // after outlier rejection (spline methods)
  std::vector<double> filled;   // pchip-filled series (spline methods)
  PointSets points;             // detection sets (spline methods)
  SplineModel spline;
  bool refine_failed = false;
  std::string failure;
};

struct PipelineResult {
  Method method = Method::cad;
  std::vector<ModeOutput> modes;
  int m0 = 0;
  int toeplitz_order = 0;
  int boundary_margin = 0;
  int degenerate_frames = 0;
  double mean_cadzow_iterations = 0.0;
  std::vector<CadzowDiagnostics> cadzow_diagnostics;  // when requested
};

/// Runs the full estimation chain for each requested method, sharing the
/// transform, slice inversion and Cadzow stages across methods so paired
/// comparisons reuse identical intermediate data. Results are returned in
/// the order the methods were requested.
std::vector<PipelineResult> run_methods(const SampledSignal& signal, int mode_count,
                                        std::span<const Method> methods,
                                        const PipelineConfig& config);

/// Single-method convenience wrapper.
PipelineResult run_algorithm1(const SampledSignal& signal, int mode_count,
                              Method method, const PipelineConfig& config);

/// E = sqrt(sum (x_n - truth_n)^2) / N' over the N' frames that survive
/// trimming `margin` frames from each end.
double normalized_l2_error(std::span<const double> estimate,
                           std::span<const double> truth, int margin);
double normalized_l2_error(std::span<const double> estimate, double truth,
                           int margin);

struct SweepConfig {
  std::vector<Method> methods = all_methods();
  std::vector<double> sigmas;
  double snr_db = 10.0;
  int realizations = 10;
  std::uint64_t seed = 0;
  PipelineConfig base;
};

struct ErrorRecord {
  Method method = Method::cad;
  double sigma = 0.0;
  double snr_db = 0.0;
  int realization = 0;
  int mode = 0;  // zero-based
  double error = 0.0;
};

struct ErrorReport {
  std::vector<ErrorRecord> records;
  std::vector<Method> methods;
  std::vector<double> sigmas;
  double snr_db = 0.0;
  int realizations = 0;
  int mode_count = 0;

  /// Arithmetic mean over realizations at one (method, sigma, mode) cell.
  double mean_error(Method method, double sigma, int mode) const;
};

/// Full factorial (sigma x realization) sweep; every method sees the same
/// R seeded noise draws, which are shared across sigmas as well since the
/// noise does not depend on the analysis window.
ErrorReport sweep(const SignalSpec& spec, const SweepConfig& config);

}  // namespace ifest
