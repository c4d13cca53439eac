#include "ifest/stft.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <vector>

#include "ifest/errors.hpp"

namespace ifest {

double WindowParams::value(double t) const {
  return std::exp(-std::numbers::pi * t * t / (sigma * sigma));
}

void WindowParams::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("window: sigma must be positive");
  if (!(truncation_radius >= 4.0 * sigma))
    throw ConfigError("window: truncation radius below 4 sigma");
}

int interior_margin(const WindowParams& window, double sample_rate) {
  return static_cast<int>(std::ceil(window.truncation_radius * sample_rate));
}

Eigen::MatrixXcd stft(const SampledSignal& signal, const WindowParams& window,
                      int bin_count) {
  window.validate();
  if (bin_count < 2) throw ConfigError("stft: bin_count must be at least 2");
  if (signal.samples.empty()) throw std::invalid_argument("stft: empty signal");

  const int n_samples = static_cast<int>(signal.samples.size());
  const double fs = signal.sample_rate;
  const int half_support = interior_margin(window, fs);

  // Window taps at offsets d/F_s, d = -D..D.
  std::vector<double> taps(2 * half_support + 1);
  for (int d = -half_support; d <= half_support; ++d)
    taps[d + half_support] = window.value(static_cast<double>(d) / fs);

  // V[n][k] = (1/F_s) sum_d f[n+d] h(d/F_s) e^{-2 i pi k d / K}. The phase
  // factor is K-periodic in d, so folding the windowed segment into K slots
  // and taking one DFT reproduces the sum exactly for any support length.
  Eigen::MatrixXcd out(n_samples, bin_count);
  Eigen::FFT<double> fft;
  std::vector<cplx> folded(bin_count), transformed(bin_count);
  const double scale = 1.0 / fs;
  for (int n = 0; n < n_samples; ++n) {
    std::fill(folded.begin(), folded.end(), cplx{0.0, 0.0});
    const int d_lo = std::max(-half_support, -n);
    const int d_hi = std::min(half_support, n_samples - 1 - n);
    for (int d = d_lo; d <= d_hi; ++d) {
      int slot = d % bin_count;
      if (slot < 0) slot += bin_count;
      folded[slot] += signal.samples[n + d] * taps[d + half_support];
    }
    fft.fwd(transformed, folded);
    for (int k = 0; k < bin_count; ++k) out(n, k) = transformed[k] * scale;
  }
  return out;
}

SpectrogramGrid spectrogram(const Eigen::MatrixXcd& stft_values,
                            const WindowParams& window, double sample_rate) {
  SpectrogramGrid grid;
  grid.values = stft_values.cwiseAbs2();
  grid.sample_rate = sample_rate;
  grid.window = window;
  return grid;
}

double two_tone_spectrogram_value(double amp1, double w1, double w2,
                                  double sigma, double t, double eta) {
  constexpr double pi = std::numbers::pi;
  const double s2 = sigma * sigma;
  const double d1 = (eta - w1) * (eta - w1);
  const double d2 = (eta - w2) * (eta - w2);
  const double modes = amp1 * amp1 * std::exp(-2.0 * pi * s2 * d1) + std::exp(-2.0 * pi * s2 * d2);
  const double cross =
      2.0 * amp1 * std::exp(-pi * s2 * (d1 + d2)) * std::cos(2.0 * pi * (w2 - w1) * t);
  return s2 * (modes + cross);
}

SpectrogramGrid analytic_two_tone(double amp1, double w1, double w2,
                                  const WindowParams& window, int frame_count,
                                  int bin_count, double sample_rate) {
  SpectrogramGrid grid;
  grid.sample_rate = sample_rate;
  grid.window = window;
  grid.values.resize(frame_count, bin_count);
  for (int n = 0; n < frame_count; ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    for (int k = 0; k < bin_count; ++k) {
      const double eta = static_cast<double>(k) / bin_count * sample_rate;
      grid.values(n, k) = two_tone_spectrogram_value(amp1, w1, w2, window.sigma, t, eta);
    }
  }
  return grid;
}

}  // namespace ifest
