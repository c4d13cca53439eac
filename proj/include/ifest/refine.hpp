#pragma once

#include <span>
#include <vector>

#include "ifest/prony.hpp"

namespace ifest {

struct OutlierPolicy {
  double mad_factor = 8.0;  // jump threshold = factor x median |first difference|
};

/// Masks frames whose value jumps away from the last accepted value by more
/// than the MAD-based threshold. Never unmasks; frames already masked
/// upstream stay masked. Throws NumericalError when more than half of the
/// track ends up masked (estimation unusable for this mode).
IFTrack reject_outliers(const IFTrack& track, const OutlierPolicy& policy = {});

/// Fritsch-Carlson monotone cubic Hermite interpolation through the
/// unmasked points, constant beyond the first/last one. Needs at least two
/// unmasked points.
std::vector<double> pchip_fill(const IFTrack& track);

struct ExtremaSets {
  std::vector<int> minima;
  std::vector<int> maxima;
};

/// Strict local extrema by sign change of the first difference; plateaus
/// contribute their midpoint index, endpoints are excluded.
ExtremaSets detect_extrema(std::span<const double> series);

/// Nearest-integer midpoints of consecutive elements of the merged ranked
/// extrema sequence. Fewer than two extrema give an empty set.
std::vector<int> build_i_if(const std::vector<int>& minima,
                            const std::vector<int>& maxima);

/// Sign changes of the second central difference after a short moving
/// average (width smooth_width); changes below 1e-12 of the series scale
/// are suppressed.
std::vector<int> detect_inflections(std::span<const double> series,
                                    int smooth_width = 5);

struct PointSets {
  std::vector<int> i_min;
  std::vector<int> i_max;
  std::vector<int> i_if;
  std::vector<int> i_inf;
  std::vector<int> i_fin;
  std::vector<int> branch_used;  // per cell: 1 interference-free, 2 inflection,
                                 // 3 midpoint, 0 empty cell
  int q_cells = 0;
};

/// Three-branch selection over Q equal cells of {0..frame_count-1}: the
/// interference-free points of the cell if any, otherwise its inflection
/// points, otherwise the cell midpoint.
std::vector<int> build_i_fin(const std::vector<int>& i_if,
                             const std::vector<int>& i_inf, int q_cells,
                             int frame_count,
                             std::vector<int>* branch_used = nullptr);

/// Natural cubic smoothing spline psi (second derivative zero at the end
/// knots, linear extrapolation outside them).
struct SplineModel {
  std::vector<double> knots;
  std::vector<double> values;
  std::vector<double> second_derivs;
  double penalty = 0.0;

  double eval(double t) const;
  /// Exact integral of psi''(t)^2 (piecewise linear squared).
  double curvature_energy() const;
};

/// Minimizes sum_{n in i_fin} (series[n] - psi(n/N))^2 + r int |psi''|^2
/// over natural cubic splines, via the Reinsch banded system. Requires at
/// least two fitting points and r in [0,1).
SplineModel fit_spline(std::span<const double> series,
                       const std::vector<int>& i_fin, double penalty,
                       int sample_count);

std::vector<double> eval_spline(const SplineModel& model,
                                std::span<const double> t_grid);

/// The fitting objective evaluated for an arbitrary model (test hook for
/// first-order optimality checks).
double spline_objective(const SplineModel& model, std::span<const double> series,
                        const std::vector<int>& i_fin, double penalty,
                        int sample_count);

struct RefineConfig {
  OutlierPolicy outliers;
  int q_cells = 10;
  double penalty = 1.0 - 1e-4;
  int inflection_smooth_width = 5;
};

struct RefineResult {
  IFTrack cleaned;
  std::vector<double> filled;
  PointSets points;
  SplineModel spline;
  std::vector<double> refined;  // psi evaluated at n/N for every frame
};

/// Full oscillation-removal stage: outlier rejection, gap filling, point
/// detection on the filled series, spline fit, dense evaluation.
RefineResult refine_track(const IFTrack& track, const RefineConfig& config,
                          int sample_count);

}  // namespace ifest
