#pragma once

#include <Eigen/Core>

#include <vector>

#include "ifest/prony.hpp"

namespace ifest {

struct CadzowConfig {
  int toeplitz_order = 0;      // T, with P <= T <= M0
  double sv_ratio_stop = 1e-3; // stop when sigma_{P+1}/sigma_P drops below
  int max_iters = 30;

  void validate(int mode_count, int m0) const;
};

/// Square (T+1)x(T+1) Toeplitz matrix with entry (i,j) = l[i-j]; rank P for
/// an exact P-tone frame.
Eigen::MatrixXcd build_toeplitz(const CoefficientFrame& frame, int toeplitz_order);

/// Nearest Toeplitz matrix in Frobenius norm: each diagonal replaced by the
/// arithmetic mean of its entries. Idempotent on Toeplitz input.
Eigen::MatrixXcd toeplitz_project(const Eigen::MatrixXcd& matrix);

struct CadzowDiagnostics {
  int iterations = 0;
  bool converged = false;
  std::vector<std::vector<double>> sv_history;  // singular values per iteration
};

/// Cadzow denoising: alternate rank-P SVD truncation and Toeplitz diagonal
/// averaging on B_T until sigma_{P+1}/sigma_P < sv_ratio_stop or max_iters.
/// Writes the denoised entries back into positions |m| <= T of the frame;
/// entries beyond T pass through unchanged. Non-convergence is reported via
/// diagnostics, not an error.
CoefficientFrame cadzow(const CoefficientFrame& frame, int mode_count,
                        const CadzowConfig& config,
                        CadzowDiagnostics* diag = nullptr);

/// Total-least-squares annihilating filter: unit-norm minimizer of
/// ||A_T h||^2 over the (2T-P+1)x(P+1) convolution matrix, i.e. the right
/// singular vector of the smallest singular value, rescaled so the leading
/// tap is 1 for root extraction. The raw unit-norm vector is kept in
/// unit_norm_taps. A multiple smallest singular value flags the filter
/// degenerate.
AnnihilatingFilter tlsa_filter(const CoefficientFrame& frame, int mode_count,
                               int toeplitz_order);

/// Default Cadzow width: largest m whose window weight ratio
/// ghat(m/F_s)/ghat(0) stays above weight_ratio, clamped to [P, M0]. The
/// inverse weighting amplifies noise at high |m|, so the usable width is
/// much narrower than the inversion range M0.
int default_toeplitz_order(const WindowParams& window, double sample_rate,
                           int mode_count, int m0, double weight_ratio = 0.1);

}  // namespace ifest
