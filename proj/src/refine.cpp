#include "ifest/refine.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ifest/errors.hpp"

namespace ifest {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
  }
  return hi;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

int sign_of(double x, double tol) { return (x > tol) - (x < -tol); }

// Walks a difference sequence and reports the midpoint index of every sign
// change; plateaus (runs at zero) collapse to their middle.
template <typename Emit>
void walk_sign_changes(std::span<const int> signs, int index_offset, Emit emit) {
  int last_sign = 0;
  int last_pos = -1;
  for (int i = 0; i < static_cast<int>(signs.size()); ++i) {
    const int s = signs[i];
    if (s == 0) continue;
    if (last_sign != 0 && s != last_sign)
      emit((last_pos + 1 + i) / 2 + index_offset, s);
    last_sign = s;
    last_pos = i;
  }
}

}  // namespace

IFTrack reject_outliers(const IFTrack& track, const OutlierPolicy& policy) {
  if (track.values.empty()) throw std::invalid_argument("reject_outliers: empty track");
  const std::size_t n = track.values.size();

  std::vector<double> abs_diffs;
  abs_diffs.reserve(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!track.outlier[i] && !track.outlier[i + 1])
      abs_diffs.push_back(std::abs(track.values[i + 1] - track.values[i]));
  const double threshold = policy.mad_factor * median(std::move(abs_diffs));

  IFTrack out = track;
  bool have_ref = false;
  double ref = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.outlier[i]) continue;
    if (!have_ref) {
      have_ref = true;
      ref = out.values[i];
      continue;
    }
    if (std::abs(out.values[i] - ref) > threshold)
      out.outlier[i] = 1;
    else
      ref = out.values[i];
  }

  const std::size_t masked =
      static_cast<std::size_t>(std::count(out.outlier.begin(), out.outlier.end(), 1));
  if (2 * masked > n)
    throw NumericalError("reject_outliers: more than half of the track is masked");
  return out;
}

std::vector<double> pchip_fill(const IFTrack& track) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < track.values.size(); ++i) {
    if (!track.outlier[i]) {
      xs.push_back(static_cast<double>(i));
      ys.push_back(track.values[i]);
    }
  }
  const int m = static_cast<int>(xs.size());
  if (m < 2) throw NumericalError("pchip_fill: needs at least two unmasked points");

  std::vector<double> h(m - 1), delta(m - 1), d(m);
  for (int i = 0; i + 1 < m; ++i) {
    h[i] = xs[i + 1] - xs[i];
    delta[i] = (ys[i + 1] - ys[i]) / h[i];
  }
  if (m == 2) {
    d[0] = d[1] = delta[0];
  } else {
    for (int i = 1; i + 1 < m; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    // Shape-preserving one-sided estimates at the ends.
    auto end_slope = [](double h0, double h1, double del0, double del1) {
      double s = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
      if (sign_of(s) != sign_of(del0))
        s = 0.0;
      else if (sign_of(del0) != sign_of(del1) && std::abs(s) > 3.0 * std::abs(del0))
        s = 3.0 * del0;
      return s;
    };
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[m - 1] = end_slope(h[m - 2], h[m - 3], delta[m - 2], delta[m - 3]);
  }

  std::vector<double> filled(track.values.size());
  int seg = 0;
  for (std::size_t i = 0; i < filled.size(); ++i) {
    const double x = static_cast<double>(i);
    if (x <= xs.front()) {
      filled[i] = ys.front();
      continue;
    }
    if (x >= xs.back()) {
      filled[i] = ys.back();
      continue;
    }
    while (xs[seg + 1] < x) ++seg;
    const double u = (x - xs[seg]) / h[seg];
    const double u2 = u * u, u3 = u2 * u;
    filled[i] = (2.0 * u3 - 3.0 * u2 + 1.0) * ys[seg] + (u3 - 2.0 * u2 + u) * h[seg] * d[seg] +
                (-2.0 * u3 + 3.0 * u2) * ys[seg + 1] + (u3 - u2) * h[seg] * d[seg + 1];
  }
  return filled;
}

ExtremaSets detect_extrema(std::span<const double> series) {
  ExtremaSets out;
  const int n = static_cast<int>(series.size());
  if (n < 3) return out;
  std::vector<int> signs(n - 1);
  for (int i = 0; i + 1 < n; ++i) signs[i] = sign_of(series[i + 1] - series[i]);
  // A rising difference at position p and a falling one at position i bound
  // a peak spanning series indices p+1..i; the walk emits that midpoint.
  walk_sign_changes(signs, 0, [&](int idx, int new_sign) {
    (new_sign < 0 ? out.maxima : out.minima).push_back(idx);
  });
  return out;
}

std::vector<int> build_i_if(const std::vector<int>& minima,
                            const std::vector<int>& maxima) {
  std::vector<int> merged(minima.size() + maxima.size());
  std::merge(minima.begin(), minima.end(), maxima.begin(), maxima.end(), merged.begin());
  std::vector<int> out;
  for (std::size_t i = 0; i + 1 < merged.size(); ++i)
    out.push_back(static_cast<int>(std::llround((merged[i] + merged[i + 1]) / 2.0)));
  return out;
}

std::vector<int> detect_inflections(std::span<const double> series, int smooth_width) {
  const int n = static_cast<int>(series.size());
  if (n < 4) return {};
  const int half = std::max(smooth_width, 1) / 2;

  std::vector<double> smoothed(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += series[j];
    smoothed[i] = acc / (hi - lo + 1);
    scale = std::max(scale, std::abs(smoothed[i]));
  }

  // Only indices with a full smoothing window participate; the shrinking
  // edge windows would otherwise inject curvature kinks of their own.
  const int lo = half + 1, hi = n - 2 - half;
  if (lo > hi) return {};
  const double tol = 1e-12 * scale;
  std::vector<int> signs(hi - lo + 1);
  for (int i = lo; i <= hi; ++i)
    signs[i - lo] = sign_of(smoothed[i + 1] - 2.0 * smoothed[i] + smoothed[i - 1], tol);

  std::vector<int> out;
  walk_sign_changes(signs, lo, [&](int idx, int) { out.push_back(idx); });
  return out;
}

std::vector<int> build_i_fin(const std::vector<int>& i_if,
                             const std::vector<int>& i_inf, int q_cells,
                             int frame_count, std::vector<int>* branch_used) {
  if (q_cells < 1) throw ConfigError("build_i_fin: Q must be at least 1");
  if (frame_count < 1) throw std::invalid_argument("build_i_fin: empty frame range");

  std::vector<int> out, branches(q_cells, 0);
  auto in_cell = [](const std::vector<int>& set, int lo, int hi) {
    auto first = std::lower_bound(set.begin(), set.end(), lo);
    auto last = std::lower_bound(first, set.end(), hi);
    return std::pair(first, last);
  };
  for (int q = 0; q < q_cells; ++q) {
    const int lo = static_cast<int>(static_cast<long long>(q) * frame_count / q_cells);
    const int hi = static_cast<int>(static_cast<long long>(q + 1) * frame_count / q_cells);
    if (lo >= hi) continue;
    if (auto [first, last] = in_cell(i_if, lo, hi); first != last) {
      out.insert(out.end(), first, last);
      branches[q] = 1;
    } else if (auto [f2, l2] = in_cell(i_inf, lo, hi); f2 != l2) {
      out.insert(out.end(), f2, l2);
      branches[q] = 2;
    } else {
      out.push_back((lo + hi - 1) / 2);
      branches[q] = 3;
    }
  }
  if (branch_used) *branch_used = std::move(branches);
  return out;
}

double SplineModel::eval(double t) const {
  const int k = static_cast<int>(knots.size());
  if (k == 0) return 0.0;
  if (k == 1) return values[0];

  auto slope_at = [&](int i, int j) {
    // Derivative at knot i of the segment [i, j] (j = i+1).
    const double h = knots[j] - knots[i];
    return (values[j] - values[i]) / h -
           h * (2.0 * second_derivs[i] + second_derivs[j]) / 6.0;
  };
  if (t <= knots.front()) return values.front() + slope_at(0, 1) * (t - knots.front());
  if (t >= knots.back()) {
    const double h = knots[k - 1] - knots[k - 2];
    const double end_slope = (values[k - 1] - values[k - 2]) / h +
                             h * (second_derivs[k - 2] + 2.0 * second_derivs[k - 1]) / 6.0;
    return values.back() + end_slope * (t - knots.back());
  }
  const int i = static_cast<int>(
      std::upper_bound(knots.begin(), knots.end(), t) - knots.begin() - 1);
  const int j = std::min(i + 1, k - 1);
  const double h = knots[j] - knots[i];
  const double a = knots[j] - t, b = t - knots[i];
  return second_derivs[i] * a * a * a / (6.0 * h) + second_derivs[j] * b * b * b / (6.0 * h) +
         (values[i] - second_derivs[i] * h * h / 6.0) * a / h +
         (values[j] - second_derivs[j] * h * h / 6.0) * b / h;
}

double SplineModel::curvature_energy() const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double h = knots[i + 1] - knots[i];
    const double m0 = second_derivs[i], m1 = second_derivs[i + 1];
    acc += h * (m0 * m0 + m0 * m1 + m1 * m1) / 3.0;
  }
  return acc;
}

SplineModel fit_spline(std::span<const double> series, const std::vector<int>& i_fin,
                       double penalty, int sample_count) {
  if (!(penalty >= 0.0 && penalty < 1.0))
    throw ConfigError("fit_spline: penalty must lie in [0,1)");
  const int k = static_cast<int>(i_fin.size());
  if (k < 2) throw NumericalError("fit_spline: needs at least two fitting points");
  if (!std::is_sorted(i_fin.begin(), i_fin.end()) ||
      std::adjacent_find(i_fin.begin(), i_fin.end()) != i_fin.end())
    throw std::invalid_argument("fit_spline: fitting indices must be strictly ascending");

  SplineModel model;
  model.penalty = penalty;
  model.knots.resize(k);
  Eigen::VectorXd y(k);
  for (int j = 0; j < k; ++j) {
    model.knots[j] = static_cast<double>(i_fin[j]) / sample_count;
    y(j) = series[i_fin[j]];
  }

  if (k == 2) {
    model.values = {y(0), y(1)};
    model.second_derivs = {0.0, 0.0};
    return model;
  }

  // Reinsch formulation: gamma holds the interior second derivatives,
  // (R + r Q^T Q) gamma = Q^T y, fitted values g = y - r Q gamma.
  const int interior = k - 2;
  Eigen::VectorXd h(k - 1);
  for (int j = 0; j + 1 < k; ++j) h(j) = model.knots[j + 1] - model.knots[j];

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, interior);
  for (int j = 0; j < interior; ++j) {
    q(j, j) = 1.0 / h(j);
    q(j + 1, j) = -1.0 / h(j) - 1.0 / h(j + 1);
    q(j + 2, j) = 1.0 / h(j + 1);
  }
  Eigen::MatrixXd r_mat = Eigen::MatrixXd::Zero(interior, interior);
  for (int j = 0; j < interior; ++j) {
    r_mat(j, j) = (h(j) + h(j + 1)) / 3.0;
    if (j + 1 < interior) {
      r_mat(j, j + 1) = h(j + 1) / 6.0;
      r_mat(j + 1, j) = h(j + 1) / 6.0;
    }
  }

  const Eigen::MatrixXd system = r_mat + penalty * (q.transpose() * q);
  const Eigen::VectorXd gamma = Eigen::LLT<Eigen::MatrixXd>(system).solve(q.transpose() * y);
  const Eigen::VectorXd fitted = y - penalty * (q * gamma);

  model.values.assign(fitted.data(), fitted.data() + k);
  model.second_derivs.assign(k, 0.0);
  for (int j = 0; j < interior; ++j) model.second_derivs[j + 1] = gamma(j);
  return model;
}

std::vector<double> eval_spline(const SplineModel& model,
                                std::span<const double> t_grid) {
  std::vector<double> out(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) out[i] = model.eval(t_grid[i]);
  return out;
}

double spline_objective(const SplineModel& model, std::span<const double> series,
                        const std::vector<int>& i_fin, double penalty,
                        int sample_count) {
  double misfit = 0.0;
  for (int n : i_fin) {
    const double diff = series[n] - model.eval(static_cast<double>(n) / sample_count);
    misfit += diff * diff;
  }
  return misfit + penalty * model.curvature_energy();
}

RefineResult refine_track(const IFTrack& track, const RefineConfig& config,
                          int sample_count) {
  RefineResult result;
  result.cleaned = reject_outliers(track, config.outliers);
  result.filled = pchip_fill(result.cleaned);

  ExtremaSets extrema = detect_extrema(result.filled);
  result.points.i_min = std::move(extrema.minima);
  result.points.i_max = std::move(extrema.maxima);
  result.points.i_if = build_i_if(result.points.i_min, result.points.i_max);
  result.points.i_inf =
      detect_inflections(result.filled, config.inflection_smooth_width);
  result.points.q_cells = config.q_cells;
  result.points.i_fin =
      build_i_fin(result.points.i_if, result.points.i_inf, config.q_cells,
                  static_cast<int>(result.filled.size()), &result.points.branch_used);

  result.spline = fit_spline(result.filled, result.points.i_fin, config.penalty,
                             sample_count);
  result.refined.resize(result.filled.size());
  for (std::size_t n = 0; n < result.refined.size(); ++n)
    result.refined[n] = result.spline.eval(static_cast<double>(n) / sample_count);
  return result;
}

}  // namespace ifest
