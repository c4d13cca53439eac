#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ifest {

using cplx = std::complex<double>;

/// One AM/FM mode A(t) e^{2i pi phi(t)}. The instantaneous frequency
/// phi'(t) is stored explicitly so experiments can score against exact
/// ground truth instead of differentiating the phase numerically.
struct ModeSpec {
  std::function<double(double)> amplitude;  // A(t), must stay > 0 on [0,1]
  std::function<double(double)> phase;      // phi(t), in cycles
  std::function<double(double)> inst_freq;  // phi'(t), in Hz
};

/// Mode with constant amplitude and polynomial IF
/// f(t) = c0 + c1 t + c2 t^2 + ...; the phase is its exact antiderivative.
ModeSpec polynomial_mode(double amplitude, std::vector<double> if_coeffs,
                         double phase_offset = 0.0);

/// A multicomponent signal on [0,1], discretized with step 1/N (F_s = N).
struct SignalSpec {
  std::vector<ModeSpec> modes;
  int sample_count = 0;
  double sample_rate() const { return static_cast<double>(sample_count); }
};

struct SampledSignal {
  std::vector<cplx> samples;
  double sample_rate = 0.0;
};

/// Grid checks: P >= 1, N >= 2, amplitudes positive, IFs positive and
/// below F_s/2 at every sample. Throws std::invalid_argument.
void validate(const SignalSpec& spec);

/// samples[n] = sum_p A_p(n/N) exp(2i pi phi_p(n/N)). Deterministic.
SampledSignal synthesize(const SignalSpec& spec);

/// Adds circularly-symmetric complex Gaussian noise, rescaled after the
/// draw so the realized SNR equals target_snr_db exactly. A +inf target
/// is the "no noise" sentinel and returns the input unchanged.
/// Reproducible: same seed, same output bits.
SampledSignal add_noise(const SampledSignal& signal, double target_snr_db,
                        std::uint64_t seed);

/// A named test signal plus the estimation defaults it is meant to be
/// run with (window length, spline penalty, partition cells).
struct Scenario {
  std::string name;
  std::string description;
  SignalSpec signal;
  double sigma = 0.02;      // analysis window length parameter
  double penalty = 1.0 - 1e-4;
  int q_cells = 10;
};

/// The three built-in scenarios: two pure tones (220.5 / 240.5 Hz), two
/// parallel linear chirps 20 Hz apart, and two chirps whose separation
/// narrows from 50 Hz to near-crossing so they interfere on only part
/// of [0,1].
std::vector<Scenario> builtin_scenarios();

/// Lookup by name ("tones", "parallel-chirps", "general-chirps" or the
/// short aliases "a", "b", "c"). Throws ConfigError on unknown names.
Scenario scenario_by_name(const std::string& name);

}  // namespace ifest
