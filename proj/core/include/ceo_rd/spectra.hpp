#pragma once

#include <Eigen/Dense>

namespace ceo_rd {

/// Eigenvalues whose magnitude is at most this are treated as exactly zero, and
/// negative eigenvalues down to -kPsdSlack are accepted as PSD boundary cases.
inline constexpr double kPsdSlack = 1e-12;

/// Constant-diagonal (gamma) / constant-off-diagonal (rho * gamma) covariance
/// family of dimension `ell`.
struct SymmetricSpec {
  double gamma = 0.0;
  double rho = 0.0;
  int ell = 2;

  /// Leading eigenvalue of the leading j x j block, (1 + (j-1) rho) gamma.
  [[nodiscard]] double lambda1(int j) const { return (1.0 + (j - 1) * rho) * gamma; }
  /// Repeated eigenvalue (multiplicity j-1), (1 - rho) gamma.
  [[nodiscard]] double lambda2() const { return (1.0 - rho) * gamma; }
};

/// The two distinct eigenvalues of a j x j symmetric block.
struct SpectralView {
  int j = 1;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Target signal X, noise Z and the observation S = X + Z.
struct SourceModel {
  SymmetricSpec x;
  SymmetricSpec z;
  SymmetricSpec s;

  [[nodiscard]] int ell() const { return x.ell; }
  [[nodiscard]] double gamma_x() const { return x.gamma; }
};

/// Eigenvalues of X, Z and S restricted to the leading j components.
/// The S eigenvalues are formed as the sum of the X and Z ones so that
/// lambda_S - lambda_X == lambda_Z holds without cancellation error.
struct ModelSpectrum {
  SpectralView x;
  SpectralView z;
  SpectralView s;
};

/// Builds a SourceModel from signal and noise specs, deriving S.
/// Throws DomainError on gamma_x <= 0, mismatched or too small ell, or any
/// negative eigenvalue (the message names which one).
[[nodiscard]] SourceModel validate(const SymmetricSpec& x, const SymmetricSpec& z);

/// Closed-form eigenvalues of the leading j x j block, snapped to zero inside
/// kPsdSlack. Throws std::out_of_range unless 1 <= j <= spec.ell.
[[nodiscard]] SpectralView eigenvalues(const SymmetricSpec& spec, int j);

[[nodiscard]] ModelSpectrum spectrum(const SourceModel& model, int j);

/// Deterministic j x j orthogonal matrix whose first column is 1/sqrt(j) * 1_j:
/// the Householder reflection taking e_1 to that vector. It is symmetric, so
/// it is its own inverse.
[[nodiscard]] Eigen::MatrixXd basis(int j);

/// Applies basis(y.size()) to y in O(j) without materializing the matrix.
void apply_basis(Eigen::Ref<Eigen::VectorXd> y);

/// Theta diag(lambda1, lambda2, ..., lambda2) Theta^T.
[[nodiscard]] Eigen::MatrixXd reconstruct(const SpectralView& view);

/// The j x j dense matrix with diagonal gamma and off-diagonal rho * gamma.
[[nodiscard]] Eigen::MatrixXd dense(const SymmetricSpec& spec, int j);

/// Minimum MMSE distortion per component of estimating X_1..X_j from
/// S_1..S_j. Degenerate spectra contribute zero.
[[nodiscard]] double d_min(const SourceModel& model, int j);

}  // namespace ceo_rd
