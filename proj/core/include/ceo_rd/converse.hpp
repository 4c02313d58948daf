#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ceo_rd/spectra.hpp"

namespace ceo_rd {

/// The two relaxed rate programs. `p` fixes the fictitious noise variance at
/// lambda_S2 and applies when lambda_S1^(j) >= lambda_S2 > 0; `p_hat` fixes it at
/// lambda_S1^(j) and applies when lambda_S2 >= lambda_S1^(j) > 0.
enum class Program { p, p_hat };

[[nodiscard]] std::string_view to_string(Program program);

/// (d1, d2, delta): leading-mode and repeated-mode distortion surrogates of the
/// k-encoder reconstruction of S, and the per-encoder residual variance.
struct FeasiblePoint {
  double d1 = 0.0;
  double d2 = 0.0;
  double delta = 0.0;
};

struct Multipliers {
  double a1 = 0.0;  // d1 <= lambda_S1^(k)
  double a2 = 0.0;  // d2 <= lambda_S2
  double b1 = 0.0;  // delta bound through d1
  double b2 = 0.0;  // delta bound through d2
  double c = 0.0;   // distortion budget

  [[nodiscard]] bool nonnegative() const {
    return a1 >= 0.0 && a2 >= 0.0 && b1 >= 0.0 && b2 >= 0.0 && c >= 0.0;
  }
};

struct Residual {
  std::string name;
  double value = 0.0;
};

struct KKTCertificate {
  Program program = Program::p;
  FeasiblePoint point;
  Multipliers multipliers;
  std::vector<Residual> stationarity;  // gradient of the Lagrangian, per variable
  std::vector<Residual> slackness;     // multiplier * constraint
  std::vector<Residual> feasibility;   // constraint values g(x) <= 0
  double objective = 0.0;
  double tolerance = 0.0;
  bool valid = false;
  /// First failing item: a residual name or "multiplier_<name>".
  std::optional<std::string> violation;
};

inline constexpr double kDefaultKktTolerance = 1e-9;

/// P applies when lambda_S1^(j) >= lambda_S2, P-hat otherwise.
[[nodiscard]] Program select_program(const SourceModel& model, int j);

/// Throws DomainError when the spectrum ordering required by `program` fails
/// at (k, j).
void check_program_case(const SourceModel& model, int k, int j, Program program);

/// Objective of program P at `point` (nats).
[[nodiscard]] double objective_eta(const SourceModel& model, int k, const FeasiblePoint& point);

/// Objective of program P-hat at `point` (nats).
[[nodiscard]] double objective_eta_hat(const SourceModel& model, int k, int j,
                                       const FeasiblePoint& point);

[[nodiscard]] double objective(const SourceModel& model, int k, int j, Program program,
                               const FeasiblePoint& point);

/// The point whose objective equals rate_bar(d_k); every rate-program
/// constraint except the caps on d1 and d2 is active there.
[[nodiscard]] FeasiblePoint candidate_minimizer(const SourceModel& model, int k, int j, double d_k,
                                                Program program);

/// Closed-form multipliers at the candidate minimizer. a1 = a2 = 0 since the
/// caps are slack; negative b's are returned as-is and signal that the
/// matching condition fails.
[[nodiscard]] Multipliers kkt_multipliers(const SourceModel& model, int k, int j, double d_k,
                                          Program program);

/// Evaluates all KKT residuals for an arbitrary point and multiplier set.
[[nodiscard]] KKTCertificate evaluate_kkt(const SourceModel& model, int k, int j, double d_k,
                                          Program program, const FeasiblePoint& point,
                                          const Multipliers& multipliers,
                                          double tol = kDefaultKktTolerance);

/// Certificate at the candidate minimizer with the closed-form multipliers.
[[nodiscard]] KKTCertificate verify_kkt(const SourceModel& model, int k, int j, double d_k,
                                        Program program, double tol = kDefaultKktTolerance);

struct NumericOptimum {
  FeasiblePoint point;
  double objective = 0.0;
};

/// Minimizes the program numerically without using the closed forms: d2 and
/// delta are set to their best feasible values for a given d1 (the objective
/// is monotone in both and their constraints are monotone surfaces), and the
/// resulting convex function of d1 is minimized by golden-section search.
[[nodiscard]] NumericOptimum solve_numeric(const SourceModel& model, int k, int j, double d_k,
                                           Program program);

/// Lower bound on d_j implied by the residual variance delta.
[[nodiscard]] double dj_lower_bound(const SourceModel& model, int k, int j, double delta,
                                    Program program);

/// Error covariance of U given the decoder output, from the one of S:
/// Gu Gs^-1 D Gs^-1 Gu + Gu - Gu Gs^-1 Gu.
[[nodiscard]] Eigen::MatrixXd sigma_identity(const Eigen::MatrixXd& gamma_u,
                                             const Eigen::MatrixXd& gamma_s,
                                             const Eigen::MatrixXd& d);

/// (D^-1 + lambda_w^-1 I - Gs^-1)^-1: the linear-MMSE error covariance of S
/// given the decoder's estimate of S and U = S - W. Matrix concave in D when
/// lambda_w does not exceed the smallest eigenvalue of Gs.
[[nodiscard]] Eigen::MatrixXd delta_bound(const Eigen::MatrixXd& d, double lambda_w,
                                          const Eigen::MatrixXd& gamma_s);

}  // namespace ceo_rd
