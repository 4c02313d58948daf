#pragma once

#include <vector>

#include "ceo_rd/rdcore.hpp"
#include "ceo_rd/spectra.hpp"

namespace ceo_rd {

/// Gaussian test channel V_i = S_i + Q_i with i.i.d. Q_i ~ N(0, lambda_q).
struct TestChannel {
  double lambda_q = 1.0;
};

/// One row of the subset rate constraints for R(A): every subset B of size
/// `size` must carry sum-rate at least I(S_B; V_B | V_{A\B}).
struct SubsetConstraint {
  int size = 1;
  double required = 0.0;  // I(S_B; V_B | V_{A\B}) in nats
  double provided = 0.0;  // size * rate
  bool satisfied = false;
  double slack = 0.0;     // provided - required
};

struct RegionCheck {
  int k = 1;
  double rate = 0.0;
  std::vector<SubsetConstraint> constraints;  // size = 1..k

  [[nodiscard]] bool all_satisfied() const;
};

/// I(S_B; V_B | V_{A\B}) for |B| = b, |A| = k. By symmetry only (b, k) matter.
/// Computed from the Schur complement of the V_A covariance.
[[nodiscard]] double subset_mutual_info(const SourceModel& model, const TestChannel& channel, int b,
                                        int k);

/// Checks that the symmetric rate point rate_bar * 1_k lies in R(A).
[[nodiscard]] RegionCheck check_symmetric_rate(const SourceModel& model, int k, double d_k);

/// The achievable (rate_bar, d_k, ..., d_ell) tuple; throws std::logic_error if
/// the symmetric rate fails a subset constraint.
[[nodiscard]] RDPoint achievable_point(const SourceModel& model, int k, double d_k);

}  // namespace ceo_rd
