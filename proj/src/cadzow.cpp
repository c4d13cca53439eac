#include "ifest/cadzow.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "ifest/errors.hpp"

namespace ifest {

void CadzowConfig::validate(int mode_count, int m0) const {
  if (toeplitz_order < mode_count || toeplitz_order > m0)
    throw ConfigError("cadzow: T must satisfy P <= T <= M0");
  if (!(sv_ratio_stop > 0.0 && sv_ratio_stop < 1.0))
    throw ConfigError("cadzow: stop ratio must lie in (0,1)");
  if (max_iters < 1) throw ConfigError("cadzow: max_iters must be at least 1");
}

Eigen::MatrixXcd build_toeplitz(const CoefficientFrame& frame, int toeplitz_order) {
  const int t = toeplitz_order;
  if (frame.m0 < t) throw std::invalid_argument("build_toeplitz: frame narrower than T");
  Eigen::MatrixXcd b(t + 1, t + 1);
  for (int i = 0; i <= t; ++i)
    for (int j = 0; j <= t; ++j) b(i, j) = frame.at(i - j);
  return b;
}

Eigen::MatrixXcd toeplitz_project(const Eigen::MatrixXcd& matrix) {
  const int n = static_cast<int>(matrix.rows());
  Eigen::MatrixXcd out(n, n);
  for (int d = -(n - 1); d <= n - 1; ++d) {
    const int lo = std::max(0, d), hi = std::min(n - 1, n - 1 + d);
    // Mean as anchor plus averaged deviations, so constant diagonals are
    // reproduced bit for bit (the projection is exactly idempotent).
    const cplx anchor = matrix(lo, lo - d);
    cplx deviation = 0.0;
    for (int i = lo; i <= hi; ++i) deviation += matrix(i, i - d) - anchor;
    const cplx mean = anchor + deviation / static_cast<double>(hi - lo + 1);
    for (int i = lo; i <= hi; ++i) out(i, i - d) = mean;
  }
  return out;
}

CoefficientFrame cadzow(const CoefficientFrame& frame, int mode_count,
                        const CadzowConfig& config, CadzowDiagnostics* diag) {
  config.validate(mode_count, frame.m0);
  const int p = mode_count;
  const int t = config.toeplitz_order;
  const int n = t + 1;

  Eigen::MatrixXcd b = build_toeplitz(frame, t);
  CadzowDiagnostics local;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    // Rank-P truncation through the Hermitian Gram matrix: eigenvectors of
    // B*B are the right singular vectors and the eigenvalues the squared
    // singular values. Projection onto the top-P right subspace gives the
    // Eckart-Young truncation without forming U explicitly.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(b.adjoint() * b);
    if (eig.info() != Eigen::Success)
      throw NumericalError("cadzow: eigendecomposition failed");

    std::vector<double> svs(n);
    for (int i = 0; i < n; ++i)
      svs[i] = std::sqrt(std::max(eig.eigenvalues()(n - 1 - i), 0.0));
    local.sv_history.push_back(svs);
    ++local.iterations;

    const Eigen::MatrixXcd top = eig.eigenvectors().rightCols(p);
    b = toeplitz_project((b * top) * top.adjoint());

    const double sp = svs[p - 1];
    const double sp1 = p < n ? svs[p] : 0.0;
    if (sp1 < config.sv_ratio_stop * sp) {
      local.converged = true;
      break;
    }
  }

  CoefficientFrame out = frame;
  // First column carries l[0..T], first row l[0..-T]; after the projection
  // every diagonal is constant so these determine all entries.
  for (int i = 0; i <= t; ++i) {
    out.at(i) = b(i, 0);
    out.at(-i) = b(0, i);
  }
  if (diag) *diag = local;
  return out;
}

AnnihilatingFilter tlsa_filter(const CoefficientFrame& frame, int mode_count,
                               int toeplitz_order) {
  const int p = mode_count;
  const int t = toeplitz_order;
  if (t < p) throw ConfigError("tlsa_filter: T must be at least P");
  if (frame.m0 < t) throw std::invalid_argument("tlsa_filter: frame narrower than T");

  const int rows = 2 * t - p + 1;
  Eigen::MatrixXcd a(rows, p + 1);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c <= p; ++c) a(r, c) = frame.at(-t + p + r - c);

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();

  AnnihilatingFilter filter;
  filter.unit_norm_taps = svd.matrixV().col(p);
  const double scale = sv(0);
  if (scale > 0.0 && sv(p - 1) - sv(p) <= 1e-12 * scale)
    filter.degenerate = true;  // smallest singular value not simple
  if (!(scale > 0.0)) filter.degenerate = true;

  const cplx leading = filter.unit_norm_taps(0);
  if (std::abs(leading) < 1e-12) {
    filter.degenerate = true;
    filter.taps = filter.unit_norm_taps.tail(p);
  } else {
    filter.taps = filter.unit_norm_taps.tail(p) / leading;
  }
  return filter;
}

int default_toeplitz_order(const WindowParams& window, double sample_rate,
                           int mode_count, int m0, double weight_ratio) {
  const double s2 = 2.0 * window.sigma * window.sigma;
  int t = mode_count;
  while (t < m0) {
    const double xi = static_cast<double>(t + 1) / sample_rate;
    if (std::exp(-std::numbers::pi * xi * xi / s2) < weight_ratio) break;
    ++t;
  }
  return t;
}

}  // namespace ifest
