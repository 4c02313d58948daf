#include "ceo_rd/bergertung.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ceo_rd/errors.hpp"

namespace ceo_rd {
namespace {

constexpr double kConstraintTol = 1e-9;

}  // namespace

bool RegionCheck::all_satisfied() const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const SubsetConstraint& c) { return c.satisfied; });
}

double subset_mutual_info(const SourceModel& model, const TestChannel& channel, int b, int k) {
  if (k < 1 || k > model.ell() || b < 1 || b > k) {
    throw DomainError("subset sizes need 1 <= b <= k <= ell (b=" + std::to_string(b) +
                      ", k=" + std::to_string(k) + ")");
  }
  if (!(channel.lambda_q > 0.0)) throw DomainError("test channel lambda_q must be positive");

  // Cov(V_A) = Gamma_S^(k) + lambda_q I; B is taken as the first b coordinates.
  Eigen::MatrixXd cov_v = dense(model.s, k);
  cov_v.diagonal().array() += channel.lambda_q;

  const int c = k - b;
  Eigen::MatrixXd cond = cov_v.topLeftCorner(b, b);
  if (c > 0) {
    const Eigen::LLT<Eigen::MatrixXd> rest(cov_v.bottomRightCorner(c, c));
    const Eigen::MatrixXd cross = cov_v.topRightCorner(b, c);
    cond -= cross * rest.solve(cross.transpose());
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(cond);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  // h(V_B | V_{A\B}) - h(Q_B)
  return 0.5 * (logdet - b * std::log(channel.lambda_q));
}

RegionCheck check_symmetric_rate(const SourceModel& model, int k, double d_k) {
  const double q = solve_lambda_q(model, k, d_k);
  RegionCheck out;
  out.k = k;
  out.rate = rate_at(model, k, q);
  for (int b = 1; b <= k; ++b) {
    SubsetConstraint row;
    row.size = b;
    row.required = subset_mutual_info(model, TestChannel{q}, b, k);
    row.provided = b * out.rate;
    row.slack = row.provided - row.required;
    row.satisfied = row.required - row.provided <= kConstraintTol * std::max(1.0, row.required);
    out.constraints.push_back(row);
  }
  return out;
}

RDPoint achievable_point(const SourceModel& model, int k, double d_k) {
  const RegionCheck region = check_symmetric_rate(model, k, d_k);
  if (!region.all_satisfied()) {
    throw std::logic_error("symmetric rate violates a subset constraint of R(A)");
  }
  RDPoint p;
  p.k = k;
  p.d_k = d_k;
  p.lambda_q = solve_lambda_q(model, k, d_k);
  p.rate = region.rate;
  p.profile = distortion_profile(model, k, d_k);
  return p;
}

}  // namespace ceo_rd
