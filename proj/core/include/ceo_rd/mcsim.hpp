#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ceo_rd/spectra.hpp"

namespace ceo_rd {

struct SimOptions {
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Samples are generated in fixed blocks of this many rows. Partial results are
/// reduced in block order, so the thread count never changes any output bit.
inline constexpr std::int64_t kSimBlockSize = 8192;

/// Counter-based normal generator: the stream for a sample depends only on
/// (seed, sample index), never on which thread produces it.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t index);
  double next();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// n i.i.d. draws of (X, Z, S = X + Z), each stored row-major as n x ell.
struct SampleBatch {
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  int ell = 0;
  std::vector<double> x;
  std::vector<double> z;
  std::vector<double> s;

  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  [[nodiscard]] Eigen::Map<const RowMatrix> x_matrix() const { return {x.data(), n, ell}; }
  [[nodiscard]] Eigen::Map<const RowMatrix> z_matrix() const { return {z.data(), n, ell}; }
  [[nodiscard]] Eigen::Map<const RowMatrix> s_matrix() const { return {s.data(), n, ell}; }
};

[[nodiscard]] SampleBatch sample(const SourceModel& model, std::int64_t n, std::uint64_t seed,
                                 const SimOptions& options = {});

struct EmpiricalPoint {
  int j = 0;
  double distortion = 0.0;      // mean per-component squared error
  double standard_error = 0.0;
};

struct EmpiricalRD {
  int k = 1;
  double lambda_q = 0.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<EmpiricalPoint> points;  // ascending j
};

/// Empirical distortion of the first j components when every encoder sees
/// V_i = S_i + Q_i, Q ~ N(0, lambda_q I), and the decoder forms the exact
/// conditional mean Gamma_X^(j) (Gamma_S^(j) + lambda_q I)^-1 V.
[[nodiscard]] EmpiricalRD empirical_distortion(const SourceModel& model, int k, double lambda_q,
                                               int j, std::int64_t n, std::uint64_t seed,
                                               const SimOptions& options = {});

/// Same as empirical_distortion for every j = k..ell, sharing one sample set.
[[nodiscard]] EmpiricalRD empirical_profile(const SourceModel& model, int k, double lambda_q,
                                            std::int64_t n, std::uint64_t seed,
                                            const SimOptions& options = {});

struct DecompositionReport {
  int j = 0;
  double lambda_w = 0.0;
  double lambda_q = 0.0;
  std::int64_t n = 0;
  double gate = 5.0;  // in standard errors

  // Mean of (U - U_hat)(U - U_hat)^T - M (S - S_hat)(S - S_hat)^T M^T with
  // M = Gu Gs^-1; it must equal Gu - Gu Gs^-1 Gu.
  Eigen::MatrixXd sigma_mean;
  Eigen::MatrixXd sigma_se;
  Eigen::MatrixXd sigma_expected;
  double sigma_max_z = 0.0;
  bool sigma_pass = false;

  // Error covariance of S given (U, V): diagonal with entries
  // lambda_w lambda_q / (lambda_w + lambda_q).
  Eigen::MatrixXd delta_mean;
  Eigen::MatrixXd delta_se;
  double delta_diagonal_expected = 0.0;
  double delta_offdiag_max_z = 0.0;
  double delta_diag_max_z = 0.0;
  bool delta_pass = false;

  [[nodiscard]] bool passed() const { return sigma_pass && delta_pass; }
};

/// Upper end of the admissible lambda_w interval: min(lambda_S1^(j), lambda_S2).
[[nodiscard]] double admissible_lambda_w_bound(const SourceModel& model, int j);

/// Builds U = S - W with W ~ N(0, lambda_w I) independent of U and checks the
/// error-covariance relation and the diagonal conditional covariance.
/// Throws DomainError unless 0 < lambda_w < admissible_lambda_w_bound.
[[nodiscard]] DecompositionReport decomposition_check(const SourceModel& model, int j,
                                                      double lambda_w, double lambda_q,
                                                      std::int64_t n, std::uint64_t seed,
                                                      const SimOptions& options = {});

}  // namespace ceo_rd
