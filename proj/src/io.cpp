#include "ifest/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ifest/errors.hpp"

namespace ifest {

std::string format_double(double value) {
  char buffer[32];
  // Find the shortest precision that round-trips.
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

void write_signal_csv(std::ostream& os, const SampledSignal& signal) {
  os << "index,real,imag\n";
  for (std::size_t n = 0; n < signal.samples.size(); ++n)
    os << n << ',' << format_double(signal.samples[n].real()) << ','
       << format_double(signal.samples[n].imag()) << '\n';
}

SampledSignal read_signal_csv(std::istream& is) {
  SampledSignal signal;
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,", 0) != 0)
    throw ConfigError("signal csv: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t index;
    double re, im;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf", &index, &re, &im) != 3)
      throw ConfigError("signal csv: malformed row: " + line);
    signal.samples.emplace_back(re, im);
  }
  signal.sample_rate = static_cast<double>(signal.samples.size());
  return signal;
}

void write_tracks_csv(std::ostream& os, const PipelineResult& result) {
  os << "frame,mode,freq_hz,amp,flags\n";
  for (std::size_t p = 0; p < result.modes.size(); ++p) {
    const ModeOutput& mode = result.modes[p];
    for (std::size_t n = 0; n < mode.raw.values.size(); ++n)
      os << n << ',' << p + 1 << ',' << format_double(mode.raw.values[n]) << ','
         << format_double(mode.amps[n]) << ','
         << (mode.raw.outlier[n] ? "masked" : "ok") << '\n';
  }
}

void write_refined_csv(std::ostream& os, const PipelineResult& result) {
  os << "frame,mode,psi_hz\n";
  for (std::size_t p = 0; p < result.modes.size(); ++p)
    for (std::size_t n = 0; n < result.modes[p].refined.size(); ++n)
      os << n << ',' << p + 1 << ',' << format_double(result.modes[p].refined[n]) << '\n';
}

void write_points_csv(std::ostream& os, const PipelineResult& result) {
  os << "mode,set,index,time_s\n";
  for (std::size_t p = 0; p < result.modes.size(); ++p) {
    const ModeOutput& mode = result.modes[p];
    const std::size_t frames = mode.raw.values.size();
    auto dump = [&](const char* name, const std::vector<int>& indices) {
      for (int idx : indices)
        os << p + 1 << ',' << name << ',' << idx << ','
           << format_double(static_cast<double>(idx) / frames) << '\n';
    };
    dump("min", mode.points.i_min);
    dump("max", mode.points.i_max);
    dump("if", mode.points.i_if);
    dump("inf", mode.points.i_inf);
    dump("fin", mode.points.i_fin);
    for (std::size_t j = 0; j < mode.spline.knots.size(); ++j)
      os << p + 1 << ",knot," << mode.points.i_fin[j] << ','
         << format_double(mode.spline.knots[j]) << '\n';
  }
}

void write_spectrogram_csv(std::ostream& os, const SpectrogramGrid& grid) {
  os << "frame,bin,value\n";
  for (int n = 0; n < grid.frames(); ++n)
    for (int k = 0; k < grid.bins(); ++k)
      os << n << ',' << k << ',' << format_double(grid.values(n, k)) << '\n';
}

void write_spectrogram_pgm(std::ostream& os, const SpectrogramGrid& grid) {
  const double peak = grid.values.maxCoeff();
  const double scale = peak > 0.0 ? 1.0 / std::sqrt(peak) : 0.0;
  os << "P5\n" << grid.frames() << ' ' << grid.bins() << "\n255\n";
  for (int k = grid.bins() - 1; k >= 0; --k)
    for (int n = 0; n < grid.frames(); ++n) {
      const double level = std::sqrt(grid.values(n, k)) * scale;
      os.put(static_cast<char>(std::lround(255.0 * std::clamp(level, 0.0, 1.0))));
    }
}

void write_error_report_csv(std::ostream& os, const ErrorReport& report) {
  os << "method,sigma,snr_db,realization,mode,error\n";
  for (const ErrorRecord& rec : report.records)
    os << method_name(rec.method) << ',' << format_double(rec.sigma) << ','
       << format_double(rec.snr_db) << ',' << rec.realization << ',' << rec.mode + 1
       << ',' << format_double(rec.error) << '\n';
  for (double sigma : report.sigmas)
    for (Method method : report.methods)
      for (int mode = 0; mode < report.mode_count; ++mode)
        os << method_name(method) << ',' << format_double(sigma) << ','
           << format_double(report.snr_db) << ",mean," << mode + 1 << ','
           << format_double(report.mean_error(method, sigma, mode)) << '\n';
}

ErrorReport read_error_report_csv(std::istream& is) {
  ErrorReport report;
  std::string line;
  if (!std::getline(is, line) || line.rfind("method,", 0) != 0)
    throw ConfigError("error report csv: missing header");
  int max_realization = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string method, sigma, snr, realization, mode, error;
    if (!std::getline(row, method, ',') || !std::getline(row, sigma, ',') ||
        !std::getline(row, snr, ',') || !std::getline(row, realization, ',') ||
        !std::getline(row, mode, ',') || !std::getline(row, error, ','))
      throw ConfigError("error report csv: malformed row: " + line);
    if (realization == "mean") continue;  // recomputed from the raw rows
    ErrorRecord rec;
    rec.method = parse_method(method);
    rec.sigma = std::stod(sigma);
    rec.snr_db = std::stod(snr);
    rec.realization = std::stoi(realization);
    rec.mode = std::stoi(mode) - 1;
    rec.error = std::stod(error);
    report.records.push_back(rec);
    report.snr_db = rec.snr_db;
    max_realization = std::max(max_realization, rec.realization);
    if (std::find(report.sigmas.begin(), report.sigmas.end(), rec.sigma) ==
        report.sigmas.end())
      report.sigmas.push_back(rec.sigma);
    if (std::find(report.methods.begin(), report.methods.end(), rec.method) ==
        report.methods.end())
      report.methods.push_back(rec.method);
    report.mode_count = std::max(report.mode_count, rec.mode + 1);
  }
  report.realizations = max_realization + 1;
  std::sort(report.sigmas.begin(), report.sigmas.end());
  return report;
}

void write_error_svg(std::ostream& os, const ErrorReport& report, int mode) {
  if (mode < 1 || mode > report.mode_count)
    throw ConfigError("plot: mode out of range");
  const int width = 640, height = 480;
  const int left = 70, right = 20, top = 30, bottom = 50;

  double sigma_lo = report.sigmas.front(), sigma_hi = report.sigmas.back();
  if (sigma_hi <= sigma_lo) sigma_hi = sigma_lo + 1e-9;
  double err_lo = std::numeric_limits<double>::infinity(), err_hi = 0.0;
  for (Method method : report.methods)
    for (double sigma : report.sigmas) {
      const double e = report.mean_error(method, sigma, mode - 1);
      if (e > 0.0) err_lo = std::min(err_lo, e);
      err_hi = std::max(err_hi, e);
    }
  if (!(err_hi > 0.0)) err_hi = 1.0;
  if (!std::isfinite(err_lo) || err_lo <= 0.0) err_lo = err_hi * 1e-3;
  const double log_lo = std::floor(std::log10(err_lo));
  const double log_hi = std::ceil(std::log10(err_hi) + 1e-9);

  auto x_of = [&](double sigma) {
    return left + (sigma - sigma_lo) / (sigma_hi - sigma_lo) * (width - left - right);
  };
  auto y_of = [&](double error) {
    const double l = std::log10(std::max(error, std::pow(10.0, log_lo)));
    return height - bottom - (l - log_lo) / (log_hi - log_lo) * (height - top - bottom);
  };
  auto coord = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"14\">normalized l2 error, mode "
     << mode << " (SNR " << format_double(report.snr_db) << " dB)</text>\n";

  // Axes and decade gridlines.
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
     << height - bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\""
     << width - right << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  for (double d = log_lo; d <= log_hi + 1e-9; d += 1.0) {
    const double y = y_of(std::pow(10.0, d));
    os << "<line x1=\"" << left << "\" y1=\"" << coord(y) << "\" x2=\"" << width - right
       << "\" y2=\"" << coord(y) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << coord(y + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e"
       << static_cast<int>(d) << "</text>\n";
  }
  for (double sigma : report.sigmas) {
    os << "<text x=\"" << coord(x_of(sigma)) << "\" y=\"" << height - bottom + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_double(sigma) << "</text>\n";
  }
  os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        "window sigma (s)</text>\n";

  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const char* color = palette[m % 4];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (double sigma : report.sigmas)
      os << coord(x_of(sigma)) << ',' << coord(y_of(report.mean_error(report.methods[m], sigma, mode - 1))) << ' ';
    os << "\"/>\n";
    const int ly = top + 16 * static_cast<int>(m);
    os << "<line x1=\"" << width - right - 150 << "\" y1=\"" << ly << "\" x2=\""
       << width - right - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << width - right - 120 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << method_name(report.methods[m]) << "</text>\n";
  }
  os << "</svg>\n";
}

void write_cadzow_diagnostics_csv(std::ostream& os, const PipelineResult& result) {
  os << "frame,iteration,converged";
  std::size_t sv_count = 0;
  for (const CadzowDiagnostics& diag : result.cadzow_diagnostics)
    for (const auto& svs : diag.sv_history) sv_count = std::max(sv_count, svs.size());
  for (std::size_t i = 0; i < sv_count; ++i) os << ",sv" << i;
  os << '\n';
  for (std::size_t n = 0; n < result.cadzow_diagnostics.size(); ++n) {
    const CadzowDiagnostics& diag = result.cadzow_diagnostics[n];
    for (std::size_t it = 0; it < diag.sv_history.size(); ++it) {
      os << n << ',' << it << ',' << (diag.converged ? 1 : 0);
      for (double sv : diag.sv_history[it]) os << ',' << format_double(sv);
      os << '\n';
    }
  }
}

}  // namespace ifest
