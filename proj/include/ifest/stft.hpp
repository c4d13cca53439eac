#pragma once

#include <Eigen/Core>

#include "ifest/signal.hpp"

namespace ifest {

/// Gaussian analysis window h(t) = exp(-pi t^2 / sigma^2), truncated at
/// +-truncation_radius for the discrete sums.
struct WindowParams {
  double sigma = 0.02;
  double truncation_radius = 0.1;

  static WindowParams gaussian(double sigma) { return {sigma, 5.0 * sigma}; }
  double value(double t) const;

  /// Validity check: sigma > 0 and radius >= 4 sigma. Throws ConfigError.
  void validate() const;
};

/// Sampled spectrogram s[n][k] = |V(n/F_s, (k/K) F_s)|^2. One frame per
/// signal sample (hop = 1), bins spanning [0, F_s).
struct SpectrogramGrid {
  Eigen::MatrixXd values;  // frames x bins, nonnegative
  double sample_rate = 0.0;
  WindowParams window;

  int frames() const { return static_cast<int>(values.rows()); }
  int bins() const { return static_cast<int>(values.cols()); }
  double frame_time(int n) const { return static_cast<double>(n) / sample_rate; }
  double bin_freq(int k) const { return static_cast<double>(k) / bins() * sample_rate; }
};

/// Discrete STFT with the rotated (frequency-shifted) phase convention,
///   V(t, eta) = integral f(x) h(x - t) e^{-2 i pi eta (x - t)} dx,
/// approximated by a Riemann sum with step 1/F_s over the truncated window
/// support. The signal is taken as zero outside [0,1], so edge frames see
/// zero padding. Returns a frames x bin_count matrix.
Eigen::MatrixXcd stft(const SampledSignal& signal, const WindowParams& window,
                      int bin_count);

/// Squared modulus of an STFT matrix.
SpectrogramGrid spectrogram(const Eigen::MatrixXcd& stft_values,
                            const WindowParams& window, double sample_rate);

/// Closed-form spectrogram of A e^{2 i pi w1 t} + e^{2 i pi w2 t}:
///   sigma^2 [ A^2 e^{-2 pi sigma^2 (eta-w1)^2} + e^{-2 pi sigma^2 (eta-w2)^2}
///           + 2 A e^{-pi sigma^2 ((eta-w1)^2 + (eta-w2)^2)} cos(2 pi (w2-w1) t) ].
double two_tone_spectrogram_value(double amp1, double w1, double w2,
                                  double sigma, double t, double eta);

/// The closed form above evaluated on the sampling lattice. Test oracle.
SpectrogramGrid analytic_two_tone(double amp1, double w1, double w2,
                                  const WindowParams& window, int frame_count,
                                  int bin_count, double sample_rate);

/// First frame index whose window support lies fully inside the signal.
int interior_margin(const WindowParams& window, double sample_rate);

}  // namespace ifest
