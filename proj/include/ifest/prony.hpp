#pragma once

#include <Eigen/Core>

#include <vector>

#include "ifest/stft.hpp"

namespace ifest {

/// Coefficient sequence l[m], m = -M0..M0, of one spectrogram time frame:
/// l[m] = sum_p a_p e^{-2 i pi m eta_p / F_s}.
struct CoefficientFrame {
  Eigen::VectorXcd l;  // size 2*M0+1, index m+M0
  int m0 = 0;
  int frame_index = 0;

  cplx at(int m) const { return l(m + m0); }
  cplx& at(int m) { return l(m + m0); }
};

/// Maps a spectrogram slice to its coefficient frame, l = D_g^{-1} V^{-1} s,
/// where V has the DFT columns e^{2 i pi m k / K} (so V^{-1} = V*/K exactly
/// when K >= 2 M0 + 1) and D_g holds the window Fourier weights
/// c_m = ghat(m/F_s)/F_s with ghat(xi) = (2 sigma^2)^{-1/2} e^{-pi xi^2/(2 sigma^2)}.
struct InversionOperator {
  int m0 = 0;
  int bin_count = 0;
  double sample_rate = 0.0;
  WindowParams window;
  Eigen::VectorXd fourier_weights;  // c_m for m = 0..M0
  Eigen::MatrixXcd inverse_rows;    // (M0+1) x K, row m = e^{-2 i pi m k/K}/(K c_m)

  double weight(int m) const { return fourier_weights(std::abs(m)); }
};

/// Largest usable M0: capped by floor((K-1)/2) and by the index where the
/// window weight ratio ghat(m/F_s)/ghat(0) falls to 1e-8.
int default_m0(const WindowParams& window, double sample_rate, int bin_count);

/// Throws ConfigError if K < 2 M0 + 1 or NumericalError if the weight ratio
/// at M0 underflows 1e-14 (D_g^{-1} would blow up; shrink M0).
InversionOperator build_inversion(const WindowParams& window, double sample_rate,
                                  int bin_count, int m0);

CoefficientFrame invert_slice(const InversionOperator& op,
                              Eigen::Ref<const Eigen::VectorXd> slice,
                              int frame_index = 0);

/// Annihilating filter h with implicit leading tap h0 = 1; taps(j) = h_{j+1}.
struct AnnihilatingFilter {
  Eigen::VectorXcd taps;
  bool degenerate = false;
  double condition = 0.0;           // Yule-Walker system conditioning
  Eigen::VectorXcd unit_norm_taps;  // TLSA only: the raw unit-norm minimizer
};

/// Solves the square Yule-Walker system built from the small-|m| entries,
/// rows j = 1..P of (l * h)_j = 0. Near-singular systems (condition above
/// 1e12) are flagged degenerate rather than rejected.
AnnihilatingFilter yule_walker(const CoefficientFrame& frame, int mode_count);

struct RootDiagnostics {
  bool degenerate = false;
  double unit_circle_dev = 0.0;  // max_p |1 - |z_p||
};

/// Roots of z^P + h1 z^{P-1} + ... + hP via companion-matrix eigenvalues;
/// frequencies eta_p = -F_s arg(z_p) / (2 pi) mod F_s, sorted ascending.
/// Roots are not projected onto the unit circle; the radial deviation is
/// reported through diag.
std::vector<double> roots_to_freqs(const AnnihilatingFilter& filter, double sample_rate,
                                   RootDiagnostics* diag = nullptr);

/// Least-squares fit of sum_p a_p e^{-2 i pi m eta_p / F_s} to l over all m.
/// Small negative solutions are clamped to zero. Throws NumericalError when
/// two frequencies coincide (gap below F_s * 1e-9).
std::vector<double> estimate_amplitudes(const CoefficientFrame& frame,
                                        const std::vector<double>& freqs,
                                        double sample_rate);

/// Per-frame estimation result; freqs sorted ascending before tracking.
struct FrameEstimate {
  std::vector<double> freqs;
  std::vector<double> amps;
  bool degenerate = false;
  double unit_circle_dev = 0.0;
  double condition = 0.0;
  int frame_index = 0;
};

/// Per-mode frequency sequence with its validity mask (true = outlier or
/// degenerate frame, excluded from downstream statistics).
struct IFTrack {
  std::vector<double> values;
  std::vector<std::uint8_t> outlier;
  int mode_index = 0;
};

/// Assigns frame-local frequencies to global mode indices by minimal total
/// displacement from the last non-degenerate frame (labels initialized by
/// ascending order at the first valid frame; ties keep ascending order).
/// Degenerate frames are assigned too but masked and never become the
/// reference. When amp_tracks is given it receives the amplitudes permuted
/// the same way, one row per frame.
std::vector<IFTrack> track_modes(const std::vector<FrameEstimate>& frames,
                                 int mode_count,
                                 Eigen::MatrixXd* amp_tracks = nullptr);

}  // namespace ifest
