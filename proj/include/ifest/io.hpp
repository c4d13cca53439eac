#pragma once

#include <iosfwd>
#include <string>

#include "ifest/pipeline.hpp"

namespace ifest {

/// Shortest round-trip decimal form of a double (%.17g trimmed); keeps CSV
/// output byte-stable across runs.
std::string format_double(double value);

void write_signal_csv(std::ostream& os, const SampledSignal& signal);
SampledSignal read_signal_csv(std::istream& is);

/// Raw per-frame tracks: frame,mode,freq_hz,amp,flags (mode is 1-based,
/// flags is "ok" or "masked").
void write_tracks_csv(std::ostream& os, const PipelineResult& result);

/// Refined estimates: frame,mode,psi_hz.
void write_refined_csv(std::ostream& os, const PipelineResult& result);

/// Detection sets and spline knots: mode,set,index,time_s with set one of
/// min/max/if/inf/fin/knot.
void write_points_csv(std::ostream& os, const PipelineResult& result);

void write_spectrogram_csv(std::ostream& os, const SpectrogramGrid& grid);

/// Binary 8-bit PGM, amplitude (square root) scaled, frequency upward.
void write_spectrogram_pgm(std::ostream& os, const SpectrogramGrid& grid);

/// Per-realization rows plus mean rows (realization column "mean"):
/// method,sigma,snr_db,realization,mode,error.
void write_error_report_csv(std::ostream& os, const ErrorReport& report);
ErrorReport read_error_report_csv(std::istream& is);

/// Log-scale line chart of mean error versus sigma, one polyline per
/// method, for one mode (1-based).
void write_error_svg(std::ostream& os, const ErrorReport& report, int mode);

/// Per-frame Cadzow diagnostics: frame,iteration,converged,sv0,sv1,...
void write_cadzow_diagnostics_csv(std::ostream& os, const PipelineResult& result);

}  // namespace ifest
