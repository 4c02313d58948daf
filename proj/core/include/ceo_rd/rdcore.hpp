#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "ceo_rd/spectra.hpp"

namespace ceo_rd {

/// Distortions closer than this to d_min^(k) or gamma_x are rejected.
inline constexpr double kIntervalMargin = 1e-12;

/// One point of the symmetric frontier at cooperation level k.
struct RDPoint {
  int k = 1;
  double d_k = 0.0;
  double lambda_q = 0.0;
  double rate = 0.0;              // nats per sample per encoder
  std::vector<double> profile;    // d_j for j = k..ell

  [[nodiscard]] double distortion(int j) const { return profile.at(static_cast<std::size_t>(j - k)); }
};

/// Throws DomainError unless 1 <= k <= ell and d_min^(k) < d_k < gamma_x
/// (with kIntervalMargin on both ends).
void check_distortion_interval(const SourceModel& model, int k, double d_k);

/// Per-component MMSE distortion of X_1..X_j from V_i = S_i + Q_i with
/// Var(Q_i) = lambda_q. Strictly increasing in lambda_q.
[[nodiscard]] double distortion_at(const SourceModel& model, int j, double lambda_q);

/// (1/2k) log det(Gamma_S^(k) + lambda_q I) / lambda_q^k in nats.
[[nodiscard]] double rate_at(const SourceModel& model, int k, double lambda_q);

/// The unique lambda_q > 0 with distortion_at(model, k, lambda_q) == d_k,
/// found by bracketed bisection.
[[nodiscard]] double solve_lambda_q(const SourceModel& model, int k, double d_k);

[[nodiscard]] double rate_bar(const SourceModel& model, int k, double d_k);

/// d_j^(k)(d_k) for j = k..ell; the first entry reproduces d_k.
[[nodiscard]] std::vector<double> distortion_profile(const SourceModel& model, int k, double d_k);

struct MuNu {
  double lambda_q = 0.0;
  std::optional<double> mu;                 // needs lambda_S1^(k) > 0
  std::optional<double> nu;                 // needs lambda_S2 > 0
  std::vector<std::optional<double>> nu_kj; // j = k..ell, needs lambda_S2 > 0
};

/// Ratios of the leading-mode and repeated-mode test-channel MMSEs, computed in
/// the simplified form lambda_S2 (lambda_S1 + q) / (lambda_S1 (lambda_S2 + q)).
[[nodiscard]] MuNu mu_nu(const SourceModel& model, int k, double d_k);

/// mu^(k) evaluated literally as a ratio of Schur complements
/// (l2 - l2^2/(l2+q)) / (l1 - l1^2/(l1+q)). Kept for cross-checking.
[[nodiscard]] double mu_schur_form(const SourceModel& model, int k, double lambda_q);

enum class Verdict { holds, fails, not_applicable, redundant };

[[nodiscard]] std::string_view to_string(Verdict v);

struct ConditionValue {
  Verdict verdict = Verdict::not_applicable;
  double value = 0.0;  // left-hand side of the polynomial inequality (>= 0 holds)
};

enum class Regime { always, near_dmin, both_ends, degenerate_x };

[[nodiscard]] std::string_view to_string(Regime r);

/// Which ratio the regime analysis is phrased in: mu when rho_S >= 0, nu otherwise.
enum class RatioBranch { mu, nu };

struct RegimeReport {
  Regime regime = Regime::always;
  RatioBranch branch = RatioBranch::mu;
  /// Both sides of the discriminant test: the condition holds for every d_k
  /// when quadratic_coeff <= 4 * constant_term.
  double quadratic_coeff = 0.0;
  double constant_term = 0.0;
  /// Limit of the ratio as d_k -> gamma_x (it tends to 1 as d_k -> d_min).
  double limit_ratio = 1.0;
  std::optional<std::pair<double, double>> roots;
};

/// Splits the d_k range into the scenarios where the matching condition holds
/// everywhere, only near d_min, near both ends, or nowhere (degenerate X).
[[nodiscard]] RegimeReport classify_regime(const SourceModel& model, int k);

struct ConditionReport {
  int k = 1;
  double d_k = 0.0;
  double lambda_q = 0.0;
  std::optional<double> mu;
  std::optional<double> nu;
  std::vector<std::optional<double>> nu_kj;  // j = k..ell
  bool rho_s_nonnegative = false;
  bool rho_s_nonpositive = false;
  ConditionValue cond1;               // rho_S >= 0 branch, in mu
  ConditionValue cond2;               // rho_S <= 0 branch, in nu
  std::vector<ConditionValue> cond3;  // rho_S <= 0, per j = k..ell
  std::vector<ConditionValue> cond4;  // rho_S <= 0, per j = k..ell
  RegimeReport regime;

  /// r >= rate_bar is certified at this d_k.
  [[nodiscard]] bool rate_matches() const {
    return cond1.verdict == Verdict::holds || cond2.verdict == Verdict::holds;
  }
  /// d_j >= d_j^(k)(d_k) is certified for this j at r = rate_bar.
  [[nodiscard]] bool profile_matches(int j) const;
};

[[nodiscard]] ConditionReport check_conditions(const SourceModel& model, int k, double d_k);

struct DegeneratePoint {
  double rate = 0.0;
  double d_j = 0.0;
};

/// Closed forms for rho_S = 1 (lambda_S2 = 0).
[[nodiscard]] DegeneratePoint degenerate_rate_s2zero(const SourceModel& model, int k, int j,
                                                     double d_k);

/// Closed form for lambda_S1^(ell) = 0 at k = ell.
[[nodiscard]] double degenerate_rate_s1zero(const SourceModel& model, double d_ell);

}  // namespace ceo_rd
