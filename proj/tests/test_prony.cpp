#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ifest/errors.hpp"
#include "ifest/prony.hpp"

using namespace ifest;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Forward construction of an exact P-tone coefficient frame,
// l[m] = sum_p a_p e^{-2 i pi m f_p / F_s}.
CoefficientFrame make_frame(const std::vector<double>& freqs,
                            const std::vector<double>& amps, int m0, double fs) {
  CoefficientFrame frame;
  frame.m0 = m0;
  frame.l.resize(2 * m0 + 1);
  for (int m = -m0; m <= m0; ++m) {
    cplx acc = 0.0;
    for (std::size_t p = 0; p < freqs.size(); ++p)
      acc += amps[p] * std::polar(1.0, -kTwoPi * m * freqs[p] / fs);
    frame.at(m) = acc;
  }
  return frame;
}

// Annihilation residuals (l * h)_j for every j where the convolution is
// fully supported; the direct statement of the filter property.
double max_annihilation_residual(const CoefficientFrame& frame,
                                 const AnnihilatingFilter& filter) {
  const int p = static_cast<int>(filter.taps.size());
  double worst = 0.0;
  for (int j = -frame.m0 + p; j <= frame.m0; ++j) {
    cplx acc = frame.at(j);
    for (int i = 1; i <= p; ++i) acc += filter.taps(i - 1) * frame.at(j - i);
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

struct Chain {
  std::vector<FrameEstimate> estimates;
  std::vector<IFTrack> tracks;
};

// stft -> spectrogram -> slice inversion -> Yule-Walker -> roots -> tracking,
// without denoising (the raw noiseless chain).
Chain run_chain(const SampledSignal& signal, int mode_count, double sigma, int bins) {
  Chain chain;
  const WindowParams window = WindowParams::gaussian(sigma);
  const SpectrogramGrid grid =
      spectrogram(stft(signal, window, bins), window, signal.sample_rate);
  const InversionOperator op = build_inversion(
      window, signal.sample_rate, bins, default_m0(window, signal.sample_rate, bins));
  for (int n = 0; n < grid.frames(); ++n) {
    const CoefficientFrame frame = invert_slice(op, grid.values.row(n), n);
    const AnnihilatingFilter filter = yule_walker(frame, mode_count);
    FrameEstimate est;
    est.frame_index = n;
    RootDiagnostics diag;
    est.freqs = roots_to_freqs(filter, signal.sample_rate, &diag);
    est.degenerate = diag.degenerate || filter.degenerate;
    chain.estimates.push_back(std::move(est));
  }
  chain.tracks = track_modes(chain.estimates, mode_count);
  return chain;
}

SampledSignal tone_pair(double w1, double w2, int n = 1024) {
  SignalSpec spec;
  spec.sample_count = n;
  spec.modes.push_back(polynomial_mode(1.0, {w1}));
  spec.modes.push_back(polynomial_mode(1.0, {w2}));
  return synthesize(spec);
}

}  // namespace

TEST_CASE("window Fourier weights match quadrature of the Fourier integral") {
  const WindowParams window = WindowParams::gaussian(0.02);
  const double fs = 1024.0;
  const InversionOperator op = build_inversion(window, fs, 512, 64);

  // c_0 closed form, frozen: (1/F_s) (2 sigma^2)^{-1/2}.
  CHECK(op.weight(0) == doctest::Approx(0.034526698300124395).epsilon(1e-14));

  // Independent trapezoid quadrature of (1/F_s) int g(x) e^{-2 i pi m x / F_s} dx
  // over [-F_s/2, F_s/2], g(x) = exp(-2 pi sigma^2 x^2).
  for (int m : {0, 1, 7, 33, 64}) {
    const int steps = 200000;
    const double dx = fs / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double x = -fs / 2.0 + i * dx;
      const double g = std::exp(-kTwoPi * window.sigma * window.sigma * x * x);
      const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      acc += w * g * std::cos(kTwoPi * m * x / fs) * dx;
    }
    acc /= fs;
    CHECK(op.weight(m) == doctest::Approx(acc).epsilon(1e-9));
    CHECK(op.weight(-m) == op.weight(m));
  }
}

TEST_CASE("DFT left inverse is exact for K >= 2 M0 + 1") {
  const int m0 = 64, bins = 512;

  // (1/K) V* V must be the identity on the coefficient space.
  Eigen::MatrixXcd v(bins, 2 * m0 + 1);
  for (int k = 0; k < bins; ++k)
    for (int m = -m0; m <= m0; ++m)
      v(k, m + m0) = std::polar(1.0, kTwoPi * m * k / bins);
  const Eigen::MatrixXcd gram = v.adjoint() * v / static_cast<double>(bins);
  const Eigen::MatrixXcd identity =
      Eigen::MatrixXcd::Identity(2 * m0 + 1, 2 * m0 + 1);
  CHECK((gram - identity).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("invert_slice recovers a synthetic coefficient vector") {
  const int m0 = 40, bins = 256;
  const WindowParams window = WindowParams::gaussian(0.02);
  const InversionOperator op = build_inversion(window, 1024.0, bins, m0);

  // Hermitian coefficient vector -> real slice s = V D_g l.
  const CoefficientFrame truth = make_frame({220.5, 240.5}, {1.0, 0.6}, m0, 1024.0);
  Eigen::VectorXd slice = Eigen::VectorXd::Zero(bins);
  for (int k = 0; k < bins; ++k) {
    cplx acc = 0.0;
    for (int m = -m0; m <= m0; ++m)
      acc += op.weight(m) * truth.at(m) * std::polar(1.0, kTwoPi * m * k / bins);
    slice(k) = acc.real();
  }
  const CoefficientFrame frame = invert_slice(op, slice, 0);
  CHECK((frame.l - truth.l).cwiseAbs().maxCoeff() <=
        1e-10 * truth.l.cwiseAbs().maxCoeff());
}

TEST_CASE("invert_slice on a pure tone gives unit-modulus phase ratios") {
  SignalSpec spec;
  spec.sample_count = 1024;
  spec.modes.push_back(polynomial_mode(1.0, {220.5}));
  const SampledSignal signal = synthesize(spec);
  const WindowParams window = WindowParams::gaussian(0.02);
  const SpectrogramGrid grid =
      spectrogram(stft(signal, window, 512), window, 1024.0);
  const InversionOperator op =
      build_inversion(window, 1024.0, 512, default_m0(window, 1024.0, 512));

  const int n = 512;
  const CoefficientFrame frame = invert_slice(op, grid.values.row(n), n);
  for (int m = -op.m0; m <= op.m0; ++m) {
    const cplx ratio = frame.at(m) / frame.at(0);
    const cplx expected = std::polar(1.0, -kTwoPi * m * 220.5 / 1024.0);
    CHECK(std::abs(ratio - expected) < 1e-6);
  }
  // Hermitian symmetry of a real slice.
  for (int m = 1; m <= op.m0; ++m)
    CHECK(std::abs(frame.at(-m) - std::conj(frame.at(m))) <=
          1e-8 * std::abs(frame.at(m)));
  // l_0 is the positive total power coefficient.
  CHECK(frame.at(0).real() > 0.0);
  CHECK(std::abs(frame.at(0).imag()) < 1e-8 * frame.at(0).real());
}

TEST_CASE("invert_slice maps the zero slice to the zero frame") {
  const WindowParams window = WindowParams::gaussian(0.02);
  const InversionOperator op = build_inversion(window, 1024.0, 256, 30);
  const CoefficientFrame frame = invert_slice(op, Eigen::VectorXd::Zero(256), 3);
  CHECK(frame.l.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_inversion rejects bad geometry") {
  const WindowParams window = WindowParams::gaussian(0.02);
  CHECK_THROWS_AS(build_inversion(window, 1024.0, 100, 64), ConfigError);
  // Weight ratio below 1e-14 at M0: sigma F_s = 20.48, so M0 = 130 underflows.
  CHECK_THROWS_AS(build_inversion(window, 1024.0, 512, 130), NumericalError);
}

TEST_CASE("yule_walker solves the one- and two-tone systems") {
  SUBCASE("P = 1 single division") {
    const CoefficientFrame frame = make_frame({220.5}, {2.0}, 8, 1024.0);
    const AnnihilatingFilter filter = yule_walker(frame, 1);
    const cplx expected = -frame.at(1) / frame.at(0);
    CHECK(std::abs(filter.taps(0) - expected) < 1e-14);
    CHECK_FALSE(filter.degenerate);
  }
  SUBCASE("P = 2 roots annihilate the frame") {
    const CoefficientFrame frame = make_frame({220.5, 240.5}, {1.0, 1.0}, 16, 1024.0);
    const AnnihilatingFilter filter = yule_walker(frame, 2);
    CHECK_FALSE(filter.degenerate);
    CHECK(max_annihilation_residual(frame, filter) < 1e-8 * std::abs(frame.at(0)));
  }
  SUBCASE("zero frame is degenerate") {
    CoefficientFrame zero;
    zero.m0 = 8;
    zero.l = Eigen::VectorXcd::Zero(17);
    CHECK(yule_walker(zero, 2).degenerate);
  }
}

TEST_CASE("roots_to_freqs inverts root angles") {
  SUBCASE("single root, exact frequency") {
    AnnihilatingFilter filter;
    filter.taps.resize(1);
    filter.taps(0) = -std::polar(1.0, -kTwoPi * 220.5 / 1024.0);
    RootDiagnostics diag;
    const std::vector<double> freqs = roots_to_freqs(filter, 1024.0, &diag);
    REQUIRE(freqs.size() == 1);
    CHECK(freqs[0] == doctest::Approx(220.5).epsilon(1e-9));
    CHECK_FALSE(diag.degenerate);
    CHECK(diag.unit_circle_dev < 1e-12);
  }
  SUBCASE("radial scaling leaves the frequency unchanged") {
    for (double rho : {0.2, 0.9, 1.7}) {
      AnnihilatingFilter filter;
      filter.taps.resize(1);
      filter.taps(0) = -rho * std::polar(1.0, -kTwoPi * 300.25 / 1024.0);
      RootDiagnostics diag;
      const std::vector<double> freqs = roots_to_freqs(filter, 1024.0, &diag);
      CHECK(freqs[0] == doctest::Approx(300.25).epsilon(1e-9));
      CHECK(diag.unit_circle_dev == doctest::Approx(std::abs(1.0 - rho)));
    }
  }
  SUBCASE("two tones recovered through the Yule-Walker filter") {
    const CoefficientFrame frame = make_frame({220.5, 240.5}, {1.0, 1.0}, 16, 1024.0);
    const std::vector<double> freqs = roots_to_freqs(yule_walker(frame, 2), 1024.0);
    REQUIRE(freqs.size() == 2);
    CHECK(freqs[0] == doctest::Approx(220.5).epsilon(1e-6));
    CHECK(freqs[1] == doctest::Approx(240.5).epsilon(1e-6));
  }
  SUBCASE("vanishing trailing tap is degenerate") {
    AnnihilatingFilter filter;
    filter.taps.resize(2);
    filter.taps(0) = -1.0;
    filter.taps(1) = 0.0;
    RootDiagnostics diag;
    roots_to_freqs(filter, 1024.0, &diag);
    CHECK(diag.degenerate);
  }
}

TEST_CASE("estimate_amplitudes recovers forward-constructed amplitudes") {
  const CoefficientFrame frame = make_frame({220.5, 240.5}, {4.0, 1.0}, 20, 1024.0);
  const std::vector<double> amps =
      estimate_amplitudes(frame, {220.5, 240.5}, 1024.0);
  REQUIRE(amps.size() == 2);
  CHECK(amps[0] == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(amps[1] == doctest::Approx(1.0).epsilon(1e-8));

  const CoefficientFrame tone = make_frame({220.5}, {1.0}, 20, 1024.0);
  const std::vector<double> one = estimate_amplitudes(tone, {220.5}, 1024.0);
  CHECK(one[0] == doctest::Approx(tone.at(0).real()).epsilon(1e-10));

  CHECK_THROWS_AS(estimate_amplitudes(frame, {220.5, 220.5}, 1024.0), NumericalError);
}

TEST_CASE("track_modes keeps labels stable") {
  SUBCASE("constant tones stay on their tracks") {
    std::vector<FrameEstimate> frames(16);
    for (auto& est : frames) est.freqs = {220.5, 240.5};
    const std::vector<IFTrack> tracks = track_modes(frames, 2);
    for (int n = 0; n < 16; ++n) {
      CHECK(tracks[0].values[n] == 220.5);
      CHECK(tracks[1].values[n] == 240.5);
      CHECK(tracks[0].outlier[n] == 0);
    }
  }
  SUBCASE("oscillating estimates keep consistent labels") {
    // Interference pushes the estimates toward each other and apart again;
    // the assignment must stay minimal-displacement throughout.
    std::vector<FrameEstimate> frames;
    for (int n = 0; n < 64; ++n) {
      const double swing = 8.0 * std::sin(kTwoPi * n / 16.0);
      FrameEstimate est;
      est.freqs = {220.5 + swing, 240.5 - swing};
      std::sort(est.freqs.begin(), est.freqs.end());
      frames.push_back(est);
    }
    const std::vector<IFTrack> tracks = track_modes(frames, 2);
    for (int n = 0; n < 64; ++n) {
      CHECK(tracks[0].values[n] <= tracks[1].values[n]);
      if (n > 0) CHECK(std::abs(tracks[0].values[n] - tracks[0].values[n - 1]) < 8.0);
    }
  }
  SUBCASE("all-degenerate prefix defers label initialization") {
    std::vector<FrameEstimate> frames(8);
    frames[0].degenerate = true;
    frames[1].degenerate = true;
    frames[0].freqs = {0.0, 0.0};
    frames[1].freqs = {500.0, 501.0};
    for (int n = 2; n < 8; ++n) frames[n].freqs = {100.0, 200.0};
    const std::vector<IFTrack> tracks = track_modes(frames, 2);
    CHECK(tracks[0].outlier[0] == 1);
    CHECK(tracks[0].outlier[1] == 1);
    CHECK(tracks[0].outlier[2] == 0);
    CHECK(tracks[0].values[2] == 100.0);
    CHECK(tracks[1].values[2] == 200.0);
  }
}

TEST_CASE("noiseless single tone is recovered on every interior frame") {
  SignalSpec spec;
  spec.sample_count = 1024;
  spec.modes.push_back(polynomial_mode(1.0, {220.5}));
  const Chain chain = run_chain(synthesize(spec), 1, 0.02, 512);
  const int margin = interior_margin(WindowParams::gaussian(0.02), 1024.0);
  for (int n = margin; n < 1024 - margin; ++n) {
    CHECK_FALSE(chain.tracks[0].outlier[n]);
    CHECK(std::abs(chain.tracks[0].values[n] - 220.5) < 1e-6 * 1024.0);
  }
}

TEST_CASE("two-tone interference oscillation has the predicted structure") {
  const Chain chain = run_chain(tone_pair(220.5, 240.5), 2, 0.02, 512);
  const int margin = interior_margin(WindowParams::gaussian(0.02), 1024.0);
  const double beat = 20.0;  // w2 - w1

  // Exactness where the cosine vanishes: instants (q + 1/4)/20 and
  // (q + 3/4)/20 that land exactly on the frame grid.
  int exact_checked = 0;
  for (int q = 0; q < 20; ++q) {
    for (double offset : {0.25, 0.75}) {
      const double frame_pos = (q + offset) / beat * 1024.0;
      const int n = static_cast<int>(std::lround(frame_pos));
      if (std::abs(frame_pos - n) > 1e-9) continue;
      if (n < margin || n >= 1024 - margin) continue;
      ++exact_checked;
      CHECK(std::abs(chain.tracks[0].values[n] - 220.5) < 1e-3 * beat);
      CHECK(std::abs(chain.tracks[1].values[n] - 240.5) < 1e-3 * beat);
    }
  }
  CHECK(exact_checked >= 4);

  // The higher mode attains maxima within one frame of m_q = (q+1/2)/20 and
  // minima within one frame of M_q = q/20 (mirrored for the lower mode).
  auto check_alignment = [&](const std::vector<double>& series, bool maxima_at_half) {
    std::vector<int> detected_max, detected_min;
    for (int n = margin + 1; n + 1 < 1024 - margin; ++n) {
      if (series[n] > series[n - 1] && series[n] > series[n + 1])
        detected_max.push_back(n);
      if (series[n] < series[n - 1] && series[n] < series[n + 1])
        detected_min.push_back(n);
    }
    auto nearest_error = [](const std::vector<int>& hits, double frame_pos) {
      double best = 1e9;
      for (int h : hits) best = std::min(best, std::abs(h - frame_pos));
      return best;
    };
    for (int q = 0; q < 20; ++q) {
      const double half_pos = (q + 0.5) / beat * 1024.0;
      const double whole_pos = q / beat * 1024.0;
      if (half_pos > margin + 26 && half_pos < 1024 - margin - 26)
        CHECK(nearest_error(maxima_at_half ? detected_max : detected_min, half_pos) <=
              1.0);
      if (whole_pos > margin + 26 && whole_pos < 1024 - margin - 26)
        CHECK(nearest_error(maxima_at_half ? detected_min : detected_max, whole_pos) <=
              1.0);
    }
  };
  check_alignment(chain.tracks[1].values, true);
  check_alignment(chain.tracks[0].values, false);
}
