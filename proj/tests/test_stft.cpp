#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>

#include "ifest/errors.hpp"
#include "ifest/io.hpp"
#include "ifest/stft.hpp"

using namespace ifest;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SampledSignal tone_pair(double w1, double w2, int n = 1024) {
  SignalSpec spec;
  spec.sample_count = n;
  spec.modes.push_back(polynomial_mode(1.0, {w1}));
  spec.modes.push_back(polynomial_mode(1.0, {w2}));
  return synthesize(spec);
}

// Reference transform: the per-bin Riemann sum written out directly.
Eigen::MatrixXcd stft_direct(const SampledSignal& signal, const WindowParams& window,
                             int bins) {
  const int n_samples = static_cast<int>(signal.samples.size());
  const double fs = signal.sample_rate;
  const int d_max = static_cast<int>(std::ceil(window.truncation_radius * fs));
  Eigen::MatrixXcd out(n_samples, bins);
  for (int n = 0; n < n_samples; ++n) {
    for (int k = 0; k < bins; ++k) {
      cplx acc = 0.0;
      for (int d = -d_max; d <= d_max; ++d) {
        const int j = n + d;
        if (j < 0 || j >= n_samples) continue;
        acc += signal.samples[j] * window.value(d / fs) *
               std::polar(1.0, -kTwoPi * k * d / bins);
      }
      out(n, k) = acc / fs;
    }
  }
  return out;
}

// Independent continuous oracle: fine-step integration of the defining
// integral with the signal evaluated analytically between samples.
cplx stft_integral(const std::function<cplx(double)>& f, double t, double eta,
                   const WindowParams& window, int substeps, double fs) {
  const double dt = 1.0 / (substeps * fs);
  cplx acc = 0.0;
  const int d_max = static_cast<int>(std::ceil(window.truncation_radius / dt));
  for (int d = -d_max; d <= d_max; ++d) {
    const double u = d * dt;
    acc += f(t + u) * window.value(u) * std::polar(1.0, -kTwoPi * eta * u);
  }
  return acc * dt;
}

}  // namespace

TEST_CASE("window parameters are validated") {
  const WindowParams zero_sigma{0.0, 0.1};
  const WindowParams short_radius{0.02, 0.05};
  CHECK_THROWS_AS(zero_sigma.validate(), ConfigError);
  CHECK_THROWS_AS(short_radius.validate(), ConfigError);
  CHECK_NOTHROW(WindowParams::gaussian(0.02).validate());
  CHECK(WindowParams::gaussian(0.02).truncation_radius == doctest::Approx(0.1));
}

TEST_CASE("zero signal transforms to zero") {
  SampledSignal zero;
  zero.sample_rate = 256.0;
  zero.samples.assign(256, cplx{0.0, 0.0});
  const Eigen::MatrixXcd v = stft(zero, WindowParams::gaussian(0.02), 64);
  CHECK(v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("folded FFT equals the direct Riemann sum, including wrap-around") {
  // K = 37 is prime and smaller than the window support here, so the folded
  // buffer wraps; the transform must still match the plain double loop.
  SignalSpec spec;
  spec.sample_count = 128;
  spec.modes.push_back(polynomial_mode(1.0, {30.0, 20.0}));
  const SampledSignal signal = synthesize(spec);
  const WindowParams window = WindowParams::gaussian(0.05);
  const Eigen::MatrixXcd fast = stft(signal, window, 37);
  const Eigen::MatrixXcd slow = stft_direct(signal, window, 37);
  CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12 * slow.cwiseAbs().maxCoeff());
}

TEST_CASE("single tone matches the closed-form Gaussian profile") {
  SignalSpec spec;
  spec.sample_count = 1024;
  spec.modes.push_back(polynomial_mode(1.0, {256.0}));  // exactly bin 128 of 512
  const SampledSignal signal = synthesize(spec);
  const WindowParams window = WindowParams::gaussian(0.02);
  const Eigen::MatrixXcd v = stft(signal, window, 512);

  const int margin = interior_margin(window, 1024.0);
  for (int n = margin; n < 1024 - margin; n += 101) {
    CHECK(std::abs(v(n, 128)) == doctest::Approx(0.02).epsilon(1e-3));
    for (int k = 120; k <= 136; ++k) {
      const double eta = k / 512.0 * 1024.0;
      const double expected =
          0.02 * std::exp(-std::numbers::pi * 0.02 * 0.02 * (eta - 256.0) * (eta - 256.0));
      CHECK(std::abs(v(n, k)) == doctest::Approx(expected).epsilon(1e-3));
    }
  }
}

TEST_CASE("interior frames agree with fine-step numerical integration") {
  const double w1 = 220.5, w2 = 240.5;
  const SampledSignal signal = tone_pair(w1, w2);
  const WindowParams window = WindowParams::gaussian(0.02);
  const Eigen::MatrixXcd v = stft(signal, window, 512);
  auto f = [&](double t) {
    return std::polar(1.0, kTwoPi * w1 * t) + std::polar(1.0, kTwoPi * w2 * t);
  };
  for (int n : {200, 512, 777}) {
    for (int k : {105, 110, 115, 120}) {
      const double t = n / 1024.0;
      const double eta = k / 512.0 * 1024.0;
      const cplx oracle = stft_integral(f, t, eta, window, 16, 1024.0);
      CHECK(std::abs(v(n, k) - oracle) < 1e-6 * 0.02);
    }
  }
}

TEST_CASE("transform is homogeneous and deterministic") {
  const SampledSignal signal = tone_pair(60.5, 80.5, 256);
  const WindowParams window = WindowParams::gaussian(0.02);
  const Eigen::MatrixXcd v = stft(signal, window, 128);

  SampledSignal scaled = signal;
  for (cplx& s : scaled.samples) s *= 2.5;
  const Eigen::MatrixXcd v_scaled = stft(scaled, window, 128);
  CHECK((v_scaled - 2.5 * v).cwiseAbs().maxCoeff() <= 1e-14 * v_scaled.cwiseAbs().maxCoeff());

  const Eigen::MatrixXcd again = stft(signal, window, 128);
  CHECK((again - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectrogram is the elementwise squared modulus") {
  Eigen::MatrixXcd v(2, 2);
  v << cplx{3.0, 4.0}, cplx{0.0, 0.0}, cplx{-1.0, 1.0}, cplx{0.0, -2.0};
  const SpectrogramGrid grid = spectrogram(v, WindowParams::gaussian(0.02), 2.0);
  CHECK(grid.values(0, 0) == 25.0);
  CHECK(grid.values(0, 1) == 0.0);
  CHECK(grid.values(1, 0) == 2.0);
  CHECK(grid.values(1, 1) == 4.0);
  CHECK(grid.values.minCoeff() >= 0.0);
}

TEST_CASE("two-tone analytic formula has its stated zeros and factorizations") {
  const double w1 = 220.5, w2 = 240.5, sigma = 0.02;
  // Spectrogram zero at t = (q+1/2)/(w2-w1), eta = (w1+w2)/2, A = 1.
  const double t_min = (4.0 + 0.5) / 20.0;
  CHECK(std::abs(two_tone_spectrogram_value(1.0, w1, w2, sigma, t_min, 230.5)) <= 1e-12);

  // Quarter-period instants: the cosine vanishes and only the modes part is left.
  const double t_free = (4.0 + 0.25) / 20.0;
  for (double eta : {220.5, 230.5, 240.5, 250.0}) {
    const double d1 = (eta - w1) * (eta - w1), d2 = (eta - w2) * (eta - w2);
    const double modes =
        sigma * sigma * (std::exp(-kTwoPi * sigma * sigma * d1) +
                         std::exp(-kTwoPi * sigma * sigma * d2));
    CHECK(two_tone_spectrogram_value(1.0, w1, w2, sigma, t_free, eta) ==
          doctest::Approx(modes).epsilon(1e-9));
  }

  // Widely separated tones: the cross term dies and the on-mode value is
  // sigma^2 A^2.
  const double far = two_tone_spectrogram_value(2.0, 100.0, 500.0, sigma, 0.37, 100.0);
  CHECK(far == doctest::Approx(sigma * sigma * 4.0).epsilon(1e-9));
}

TEST_CASE("computed spectrogram dips at the interference nulls") {
  const SampledSignal signal = tone_pair(220.5, 240.5);
  const WindowParams window = WindowParams::gaussian(0.02);
  const SpectrogramGrid grid =
      spectrogram(stft(signal, window, 512), window, 1024.0);
  // Frame nearest m_q = 4.5/20 s and bin nearest 230.5 Hz.
  const int n0 = static_cast<int>(std::lround(4.5 / 20.0 * 1024.0));
  const int k0 = static_cast<int>(std::lround(230.5 / 1024.0 * 512.0));
  const double v = grid.values(n0, k0);
  CHECK(v < 1e-2 * grid.values.maxCoeff());
  CHECK(v <= grid.values(n0 - 1, k0));
  CHECK(v <= grid.values(n0 + 1, k0));
  CHECK(v <= grid.values(n0, k0 - 1));
  CHECK(v <= grid.values(n0, k0 + 1));
}

TEST_CASE("computed spectrogram matches the analytic two-tone oracle") {
  const SampledSignal signal = tone_pair(220.5, 240.5);
  const WindowParams window = WindowParams::gaussian(0.02);
  const SpectrogramGrid grid =
      spectrogram(stft(signal, window, 512), window, 1024.0);
  const SpectrogramGrid oracle =
      analytic_two_tone(1.0, 220.5, 240.5, window, 1024, 512, 1024.0);

  const int margin = interior_margin(window, 1024.0);
  const double scale = oracle.values.maxCoeff();
  double worst = 0.0;
  for (int n = margin; n < 1024 - margin; ++n)
    worst = std::max(worst,
                     (grid.values.row(n) - oracle.values.row(n)).cwiseAbs().maxCoeff());
  CHECK(worst / scale < 1e-3);
}

TEST_CASE("global phase rotation leaves the spectrogram unchanged") {
  SignalSpec spec, rotated;
  spec.sample_count = rotated.sample_count = 512;
  spec.modes.push_back(polynomial_mode(1.0, {120.5}));
  spec.modes.push_back(polynomial_mode(1.0, {140.5}));
  rotated.modes.push_back(polynomial_mode(1.0, {120.5}, 0.37));
  rotated.modes.push_back(polynomial_mode(1.0, {140.5}, 0.37));
  const WindowParams window = WindowParams::gaussian(0.03);
  const SpectrogramGrid a =
      spectrogram(stft(synthesize(spec), window, 256), window, 512.0);
  const SpectrogramGrid b =
      spectrogram(stft(synthesize(rotated), window, 256), window, 512.0);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-12 * a.values.maxCoeff());
}

TEST_CASE("spectrogram exports") {
  const SampledSignal signal = tone_pair(30.5, 40.5, 128);
  const WindowParams window = WindowParams::gaussian(0.05);
  const SpectrogramGrid grid =
      spectrogram(stft(signal, window, 64), window, 128.0);

  std::ostringstream csv;
  write_spectrogram_csv(csv, grid);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "frame,bin,value");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 128 * 64);

  std::ostringstream pgm;
  write_spectrogram_pgm(pgm, grid);
  CHECK(pgm.str().substr(0, 3) == "P5\n");
  CHECK(pgm.str().size() > static_cast<std::size_t>(128 * 64));
}
