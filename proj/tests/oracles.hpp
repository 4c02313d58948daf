#pragma once

// Reference computations used by the tests. They work on dense matrices with
// generic Eigen solvers and never call the closed-form spectral formulas of the
// library, so agreement between the two is meaningful.

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "ceo_rd/spectra.hpp"

namespace oracle {

inline Eigen::MatrixXd cov(double gamma, double rho, int j) {
  Eigen::MatrixXd m(j, j);
  for (int r = 0; r < j; ++r) {
    for (int c = 0; c < j; ++c) m(r, c) = r == c ? gamma : rho * gamma;
  }
  return m;
}

inline Eigen::MatrixXd cov_x(const ceo_rd::SourceModel& m, int j) {
  return cov(m.x.gamma, m.x.rho, j);
}
inline Eigen::MatrixXd cov_z(const ceo_rd::SourceModel& m, int j) {
  return cov(m.z.gamma, m.z.rho, j);
}
inline Eigen::MatrixXd cov_s(const ceo_rd::SourceModel& m, int j) {
  return cov_x(m, j) + cov_z(m, j);
}

inline double logdet_spd(const Eigen::MatrixXd& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  return es.eigenvalues().array().log().sum();
}

/// Eigenvalues of a symmetric block without the closed form: the all-ones
/// direction gives the leading one through a Rayleigh quotient and the trace
/// gives the repeated one.
struct Pair {
  double l1;
  double l2;
};
inline Pair block_eigs(const Eigen::MatrixXd& a) {
  const auto j = a.rows();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(j);
  const double l1 = ones.dot(a * ones) / static_cast<double>(j);
  const double l2 = j > 1 ? (a.trace() - l1) / static_cast<double>(j - 1) : 0.0;
  return {l1, l2};
}

/// Per-component MMSE of X^(j) from S^(j) + Q^(j) by the trace formula.
inline double distortion_trace(const ceo_rd::SourceModel& m, int j, double q) {
  const Eigen::MatrixXd gx = cov_x(m, j);
  Eigen::MatrixXd gv = cov_s(m, j);
  gv.diagonal().array() += q;
  const Eigen::MatrixXd err = gx - gx * gv.ldlt().solve(gx);
  return err.trace() / j;
}

/// d_min^(j) from the Moore-Penrose pseudo-inverse of Gamma_S^(j).
inline double d_min_dense(const ceo_rd::SourceModel& m, int j) {
  const Eigen::MatrixXd gx = cov_x(m, j);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_s(m, j));
  Eigen::VectorXd inv = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > 1e-10 ? 1.0 / inv(i) : 0.0;
  const Eigen::MatrixXd pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return (gx - gx * pinv * gx).trace() / j;
}

/// (1/2k) log det(I + Gamma_S^(k) / q).
inline double rate_logdet(const ceo_rd::SourceModel& m, int k, double q) {
  Eigen::MatrixXd a = cov_s(m, k) / q;
  a.diagonal().array() += 1.0;
  return logdet_spd(a) / (2.0 * k);
}

/// Root of distortion_trace(k, q) = d by bisection in long double on log q.
inline double lambda_q_bisect(const ceo_rd::SourceModel& m, int k, double d) {
  long double lo = -60.0L;
  long double hi = 60.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (distortion_trace(m, k, static_cast<double>(std::exp(mid))) < d) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(std::exp(0.5L * (lo + hi)));
}

/// I(S_B; V_B | V_{A\B}) via entropies: h(V_A) - h(V_{A\B}) - h(Q_B).
inline double subset_mi_entropy(const ceo_rd::SourceModel& m, double q, int b, int k) {
  Eigen::MatrixXd va = cov_s(m, k);
  va.diagonal().array() += q;
  const double whole = logdet_spd(va);
  const double rest = k - b > 0 ? logdet_spd(va.bottomRightCorner(k - b, k - b)) : 0.0;
  return 0.5 * (whole - rest - b * std::log(q));
}

/// Spectral quantities of a model computed from dense blocks.
struct Spectra {
  double x1, x2, z1, z2, s1, s2;
};
inline Spectra spectra(const ceo_rd::SourceModel& m, int j) {
  // The repeated eigenvalue does not depend on the block size, so it is read
  // off a block of size at least 2 even when j = 1.
  const int j2 = std::max(j, 2);
  const Pair x = block_eigs(cov_x(m, j)), x2 = block_eigs(cov_x(m, j2));
  const Pair z = block_eigs(cov_z(m, j)), z2 = block_eigs(cov_z(m, j2));
  const Pair s = block_eigs(cov_s(m, j)), s2 = block_eigs(cov_s(m, j2));
  return {x.l1, x2.l2, z.l1, z2.l2, s.l1, s2.l2};
}

/// Matching-condition polynomials evaluated straight from their definitions.
struct Conditions {
  double cond1, cond2, cond3, cond4;
};
inline Conditions conditions(const ceo_rd::SourceModel& m, int k, int j, double q) {
  const Spectra sk = spectra(m, k);
  const Spectra sj = spectra(m, j);
  const double mu = sk.s2 * (sk.s1 + q) / (sk.s1 * (sk.s2 + q));
  const double nu = 1.0 / mu;
  const double nkj = sj.s1 * (sk.s2 + q) / ((sj.s1 + q) * sk.s2);
  const double a = sk.x1 * sk.x1 * sk.s2 * sk.s2;
  const double b = sk.x2 * sk.x2 * sk.s1 * sk.s1;
  return {(k - 1.0) * b * mu * (mu - 1.0) + k * a, a * nu * (nu - 1.0) + k * b,
          (nkj + k - 1.0) * a * nu * nu + (k - 1.0) * (nkj - nu) * b,
          (nkj - 1.0) * a * nu * nu + ((k - 1.0) * nkj + nu) * b};
}

/// Random valid model. rho_sign > 0 forces rho_S > 0, < 0 forces rho_S < 0.
inline ceo_rd::SourceModel random_model(std::mt19937_64& rng, int min_ell = 2, int max_ell = 8,
                                        int rho_sign = 0) {
  std::uniform_int_distribution<int> ell_dist(min_ell, max_ell);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const int ell = ell_dist(rng);
    const double floor_rho = -1.0 / (ell - 1.0);
    auto rho = [&] { return floor_rho + 0.02 + (0.97 - floor_rho - 0.02) * u(rng); };
    const double gx = 0.2 + 4.8 * u(rng);
    const double gz = 0.05 + 4.95 * u(rng);
    ceo_rd::SymmetricSpec x{gx, rho(), ell};
    ceo_rd::SymmetricSpec z{gz, rho(), ell};
    const ceo_rd::SourceModel m = ceo_rd::validate(x, z);
    if (rho_sign > 0 && !(m.s.rho > 0.01)) continue;
    if (rho_sign < 0 && !(m.s.rho < -0.01)) continue;
    return m;
  }
}

/// A distortion strictly inside (d_min^(k), gamma_x), away from both ends.
inline double random_distortion(std::mt19937_64& rng, const ceo_rd::SourceModel& m, int k) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  const double lo = d_min_dense(m, k);
  return lo + (m.gamma_x() - lo) * u(rng);
}

inline ceo_rd::SourceModel make(double gx, double rx, double gz, double rz, int ell) {
  return ceo_rd::validate({gx, rx, ell}, {gz, rz, ell});
}

/// The reference fixture: two independent unit-variance sources in dimension 3.
inline ceo_rd::SourceModel m0() { return make(1.0, 0.0, 1.0, 0.0, 3); }

}  // namespace oracle
