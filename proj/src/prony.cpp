#include "ifest/prony.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ifest/errors.hpp"

namespace ifest {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double weight_ratio(const WindowParams& window, double fs, int m) {
  const double xi = static_cast<double>(m) / fs;
  return std::exp(-std::numbers::pi * xi * xi / (2.0 * window.sigma * window.sigma));
}

}  // namespace

int default_m0(const WindowParams& window, double sample_rate, int bin_count) {
  const int cap = (bin_count - 1) / 2;
  int m = 1;
  while (m < cap && weight_ratio(window, sample_rate, m + 1) > 1e-8) ++m;
  return m;
}

InversionOperator build_inversion(const WindowParams& window, double sample_rate,
                                  int bin_count, int m0) {
  window.validate();
  if (m0 < 1) throw ConfigError("build_inversion: M0 must be at least 1");
  if (bin_count < 2 * m0 + 1)
    throw ConfigError("build_inversion: K must be at least 2*M0+1 for an exact left inverse");
  if (weight_ratio(window, sample_rate, m0) <= 1e-14)
    throw NumericalError("build_inversion: window weight underflow at M0; shrink M0");

  InversionOperator op;
  op.m0 = m0;
  op.bin_count = bin_count;
  op.sample_rate = sample_rate;
  op.window = window;

  // c_m = ghat(m/F_s) / F_s; ghat(0) = (2 sigma^2)^{-1/2}.
  const double c0 = 1.0 / (window.sigma * std::sqrt(2.0) * sample_rate);
  op.fourier_weights.resize(m0 + 1);
  for (int m = 0; m <= m0; ++m)
    op.fourier_weights(m) = c0 * weight_ratio(window, sample_rate, m);

  // Row m of the left inverse: e^{-2 i pi m k / K} / (K c_m). Negative m
  // follows by conjugation since the slices are real.
  op.inverse_rows.resize(m0 + 1, bin_count);
  for (int m = 0; m <= m0; ++m) {
    const double row_scale = 1.0 / (bin_count * op.fourier_weights(m));
    for (int k = 0; k < bin_count; ++k) {
      const double angle = -kTwoPi * m * k / bin_count;
      op.inverse_rows(m, k) = std::polar(row_scale, angle);
    }
  }
  return op;
}

CoefficientFrame invert_slice(const InversionOperator& op,
                              Eigen::Ref<const Eigen::VectorXd> slice,
                              int frame_index) {
  if (slice.size() != op.bin_count)
    throw std::invalid_argument("invert_slice: slice length does not match K");
  CoefficientFrame frame;
  frame.m0 = op.m0;
  frame.frame_index = frame_index;
  frame.l.resize(2 * op.m0 + 1);
  const Eigen::VectorXcd upper = op.inverse_rows * slice;
  for (int m = 0; m <= op.m0; ++m) {
    frame.at(m) = upper(m);
    frame.at(-m) = std::conj(upper(m));
  }
  return frame;
}

AnnihilatingFilter yule_walker(const CoefficientFrame& frame, int mode_count) {
  const int p = mode_count;
  if (p < 1) throw std::invalid_argument("yule_walker: mode count must be positive");
  if (frame.m0 < p)
    throw std::invalid_argument("yule_walker: frame needs entries up to |m| = P");

  Eigen::MatrixXcd a(p, p);
  Eigen::VectorXcd rhs(p);
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c) a(r, c) = frame.at(r - c);
    rhs(r) = -frame.at(r + 1);
  }

  AnnihilatingFilter filter;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(p - 1);
  filter.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smax > 0.0) || filter.condition > 1e12) filter.degenerate = true;
  filter.taps = svd.solve(rhs);
  return filter;
}

std::vector<double> roots_to_freqs(const AnnihilatingFilter& filter, double sample_rate,
                                   RootDiagnostics* diag) {
  const int p = static_cast<int>(filter.taps.size());
  RootDiagnostics local;
  local.degenerate = filter.degenerate;

  const double tap_scale = 1.0 + filter.taps.cwiseAbs().maxCoeff();
  if (std::abs(filter.taps(p - 1)) < 1e-12 * tap_scale) local.degenerate = true;

  Eigen::VectorXcd roots(p);
  if (p == 1) {
    roots(0) = -filter.taps(0);
  } else {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(p, p);
    for (int i = 0; i + 1 < p; ++i) companion(i + 1, i) = 1.0;
    for (int i = 0; i < p; ++i) companion(i, p - 1) = -filter.taps(p - 1 - i);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    roots = solver.eigenvalues();
  }

  std::vector<double> freqs(p);
  for (int i = 0; i < p; ++i) {
    const double radius = std::abs(roots(i));
    local.unit_circle_dev = std::max(local.unit_circle_dev, std::abs(1.0 - radius));
    if (!(radius > 0.0)) local.degenerate = true;
    double f = -sample_rate * std::arg(roots(i)) / kTwoPi;
    f = std::fmod(f, sample_rate);
    if (f < 0.0) f += sample_rate;
    freqs[i] = f;
  }
  std::sort(freqs.begin(), freqs.end());
  if (diag) *diag = local;
  return freqs;
}

std::vector<double> estimate_amplitudes(const CoefficientFrame& frame,
                                        const std::vector<double>& freqs,
                                        double sample_rate) {
  const int p = static_cast<int>(freqs.size());
  if (p < 1) throw std::invalid_argument("estimate_amplitudes: no frequencies");
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (std::abs(freqs[i] - freqs[j]) <= sample_rate * 1e-9)
        throw NumericalError("estimate_amplitudes: coincident frequencies");

  // Real least squares for real nonnegative amplitudes: stack the real and
  // imaginary parts of the Vandermonde-type system.
  const int rows = 2 * frame.m0 + 1;
  Eigen::MatrixXd design(2 * rows, p);
  Eigen::VectorXd target(2 * rows);
  for (int m = -frame.m0; m <= frame.m0; ++m) {
    const int r = m + frame.m0;
    for (int j = 0; j < p; ++j) {
      const cplx u = std::polar(1.0, -kTwoPi * m * freqs[j] / sample_rate);
      design(r, j) = u.real();
      design(rows + r, j) = u.imag();
    }
    target(r) = frame.at(m).real();
    target(rows + r) = frame.at(m).imag();
  }
  Eigen::VectorXd amps = design.colPivHouseholderQr().solve(target);
  std::vector<double> out(p);
  for (int j = 0; j < p; ++j) out[j] = std::max(amps(j), 0.0);
  return out;
}

std::vector<IFTrack> track_modes(const std::vector<FrameEstimate>& frames,
                                 int mode_count, Eigen::MatrixXd* amp_tracks) {
  const int p = mode_count;
  if (p < 1) throw std::invalid_argument("track_modes: mode count must be positive");
  if (p > 8) throw std::invalid_argument("track_modes: permutation matching limited to P <= 8");

  std::vector<IFTrack> tracks(p);
  for (int j = 0; j < p; ++j) {
    tracks[j].mode_index = j;
    tracks[j].values.assign(frames.size(), 0.0);
    tracks[j].outlier.assign(frames.size(), 1);
  }
  if (amp_tracks) amp_tracks->setZero(static_cast<Eigen::Index>(frames.size()), p);

  std::vector<double> reference;
  std::vector<int> order(p);
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const FrameEstimate& est = frames[n];
    const bool usable = !est.degenerate && static_cast<int>(est.freqs.size()) == p;

    std::iota(order.begin(), order.end(), 0);
    if (!reference.empty() && static_cast<int>(est.freqs.size()) == p) {
      // est.freqs is sorted, so the identity permutation is the
      // ascending-order assignment and wins ties.
      std::vector<int> perm(order), best(order);
      double best_cost = std::numeric_limits<double>::infinity();
      do {
        double cost = 0.0;
        for (int j = 0; j < p; ++j) cost += std::abs(est.freqs[perm[j]] - reference[j]);
        if (cost < best_cost) {
          best_cost = cost;
          best = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      order = best;
    }

    for (int j = 0; j < p; ++j) {
      const bool has_value = j < static_cast<int>(est.freqs.size());
      tracks[j].values[n] = has_value ? est.freqs[order[j]] : 0.0;
      tracks[j].outlier[n] = usable ? 0 : 1;
      if (amp_tracks && has_value && order[j] < static_cast<int>(est.amps.size()))
        (*amp_tracks)(static_cast<Eigen::Index>(n), j) = est.amps[order[j]];
    }
    if (usable) {
      if (reference.empty()) reference.resize(p);
      for (int j = 0; j < p; ++j) reference[j] = est.freqs[order[j]];
    }
  }
  return tracks;
}

}  // namespace ifest
