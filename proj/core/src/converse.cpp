#include "ceo_rd/converse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ceo_rd/errors.hpp"
#include "ceo_rd/rdcore.hpp"

namespace ceo_rd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Everything a rate program needs, with the fictitious noise variance w already
// sent to its limit (lambda_S2 for P, lambda_S1^(j) for P-hat).
struct ProgramData {
  int k = 1;
  double s1 = 0.0;  // lambda_S1^(k)
  double s2 = 0.0;  // lambda_S2
  double w = 0.0;   // lambda_W
  double a = 0.0;   // (lambda_X1^(k) / lambda_S1^(k))^2
  double b = 0.0;   // (lambda_X2 / lambda_S2)^2
  double budget = 0.0;  // k (d_k - d_min^(k)): room left in the distortion constraint
};

ProgramData program_data(const SourceModel& model, int k, int j, Program program) {
  const ModelSpectrum sk = spectrum(model, k);
  ProgramData pd;
  pd.k = k;
  pd.s1 = sk.s.lambda1;
  pd.s2 = sk.s.lambda2;
  pd.w = program == Program::p ? pd.s2 : spectrum(model, j).s.lambda1;
  pd.a = pd.s1 > 0.0 ? (sk.x.lambda1 / pd.s1) * (sk.x.lambda1 / pd.s1) : 0.0;
  pd.b = pd.s2 > 0.0 ? (sk.x.lambda2 / pd.s2) * (sk.x.lambda2 / pd.s2) : 0.0;
  return pd;
}

ProgramData program_data(const SourceModel& model, int k, int j, double d_k, Program program) {
  ProgramData pd = program_data(model, k, j, program);
  pd.budget = k * (d_k - d_min(model, k));
  return pd;
}

// (1/d + 1/w - 1/s)^-1, or -inf when the inner sum is not positive.
double delta_cap(double d, double w, double s) {
  const double inner = 1.0 / d + 1.0 / w - 1.0 / s;
  return inner > 0.0 ? 1.0 / inner : -kInf;
}

double general_objective(const ProgramData& pd, const FeasiblePoint& pt) {
  const int k = pd.k;
  const double lead = pd.s1 * pd.s1 / ((pd.s1 - pd.w) * pt.d1 + pd.s1 * pd.w);
  const double rep = pd.s2 * pd.s2 / ((pd.s2 - pd.w) * pt.d2 + pd.s2 * pd.w);
  if (!(lead > 0.0) || !(rep > 0.0) || !(pt.delta > 0.0)) {
    throw DomainError("rate program objective has a nonpositive log argument");
  }
  return std::log(lead) / (2.0 * k) + (k - 1.0) / (2.0 * k) * std::log(rep) +
         0.5 * std::log(pd.w / pt.delta);
}

// The objective with log arguments clamped to +inf; used inside the line search.
double objective_or_inf(const ProgramData& pd, const FeasiblePoint& pt) {
  if (!(pt.d1 > 0.0) || !(pt.d2 > 0.0) || !(pt.delta > 0.0)) return kInf;
  return general_objective(pd, pt);
}

// Linear distortion constraint value, <= 0 when satisfied.
double distortion_slack(const ProgramData& pd, const FeasiblePoint& pt) {
  return pd.a * pt.d1 + (pd.k - 1.0) * pd.b * pt.d2 - pd.budget;
}

}  // namespace

std::string_view to_string(Program program) { return program == Program::p ? "P" : "P-hat"; }

Program select_program(const SourceModel& model, int j) {
  const ModelSpectrum sj = spectrum(model, j);
  return sj.s.lambda1 >= sj.s.lambda2 ? Program::p : Program::p_hat;
}

void check_program_case(const SourceModel& model, int k, int j, Program program) {
  if (k < 1 || j < k || j > model.ell()) {
    throw DomainError("need 1 <= k <= j <= ell (k=" + std::to_string(k) + ", j=" +
                      std::to_string(j) + ")");
  }
  const ModelSpectrum sj = spectrum(model, j);
  const double lj = sj.s.lambda1;
  const double l2 = sj.s.lambda2;
  if (program == Program::p && !(lj >= l2 && l2 > 0.0)) {
    throw DomainError("program P needs lambda_S1^(j) >= lambda_S2 > 0");
  }
  if (program == Program::p_hat && !(l2 >= lj && lj > 0.0)) {
    throw DomainError("program P-hat needs lambda_S2 >= lambda_S1^(j) > 0");
  }
}

double objective_eta(const SourceModel& model, int k, const FeasiblePoint& point) {
  return general_objective(program_data(model, k, k, Program::p), point);
}

double objective_eta_hat(const SourceModel& model, int k, int j, const FeasiblePoint& point) {
  if (!(spectrum(model, j).s.lambda1 > 0.0)) {
    throw DomainError("objective_eta_hat needs lambda_S1^(j) > 0");
  }
  return general_objective(program_data(model, k, j, Program::p_hat), point);
}

double objective(const SourceModel& model, int k, int j, Program program,
                 const FeasiblePoint& point) {
  return program == Program::p ? objective_eta(model, k, point)
                               : objective_eta_hat(model, k, j, point);
}

FeasiblePoint candidate_minimizer(const SourceModel& model, int k, int j, double d_k,
                                  Program program) {
  check_program_case(model, k, j, program);
  const double q = solve_lambda_q(model, k, d_k);
  const ProgramData pd = program_data(model, k, j, program);
  FeasiblePoint pt;
  pt.d1 = 1.0 / (1.0 / pd.s1 + 1.0 / q);
  pt.d2 = 1.0 / (1.0 / pd.s2 + 1.0 / q);
  pt.delta = 1.0 / (1.0 / pd.w + 1.0 / q);
  return pt;
}

Multipliers kkt_multipliers(const SourceModel& model, int k, int j, double d_k,
                            Program program) {
  const FeasiblePoint pt = candidate_minimizer(model, k, j, d_k, program);
  const ProgramData pd = program_data(model, k, j, program);
  const double d1 = pt.d1, d2 = pt.d2, delta = pt.delta;

  Multipliers m;
  m.c = (d1 + (k - 1.0) * d2) / (pd.a * d1 * d1 + (k - 1.0) * pd.b * d2 * d2) / (2.0 * k);
  if (program == Program::p) {
    // delta coincides with d2 here
    m.b1 = (d2 - d1 + 2.0 * k * m.c * pd.a * d1 * d1) / (2.0 * k * d2 * d2);
    m.b2 = (k - 1.0) * m.c * pd.b;
  } else {
    m.b1 = (delta - d1 + 2.0 * k * m.c * pd.a * d1 * d1) / (2.0 * k * delta * delta);
    m.b2 = ((k - 1.0) * (delta - d2) + 2.0 * k * (k - 1.0) * m.c * pd.b * d2 * d2) /
           (2.0 * k * delta * delta);
  }
  return m;
}

KKTCertificate evaluate_kkt(const SourceModel& model, int k, int j, double d_k, Program program,
                            const FeasiblePoint& point, const Multipliers& mult, double tol) {
  check_program_case(model, k, j, program);
  check_distortion_interval(model, k, d_k);
  const ProgramData pd = program_data(model, k, j, d_k, program);
  const double d1 = point.d1, d2 = point.d2, delta = point.delta;
  const double s1 = pd.s1, s2 = pd.s2, w = pd.w;

  KKTCertificate cert;
  cert.program = program;
  cert.point = point;
  cert.multipliers = mult;
  cert.tolerance = tol;

  const double g1 = 1.0 + d1 / w - d1 / s1;  // d/d d1 of the delta cap is g1^-2
  const double g2 = 1.0 + d2 / w - d2 / s2;
  cert.stationarity = {
      {"stationarity_d1", -(s1 - w) / (2.0 * k * ((s1 - w) * d1 + s1 * w)) + mult.a1 -
                              mult.b1 / (g1 * g1) + mult.c * pd.a},
      {"stationarity_d2", -(k - 1.0) * (s2 - w) / (2.0 * k * ((s2 - w) * d2 + s2 * w)) + mult.a2 -
                              mult.b2 / (g2 * g2) + mult.c * (k - 1.0) * pd.b},
      {"stationarity_delta", -1.0 / (2.0 * delta) + mult.b1 + mult.b2},
  };

  const double cap1 = delta - delta_cap(d1, w, s1);
  const double cap2 = delta - delta_cap(d2, w, s2);
  const double dist = distortion_slack(pd, point);
  cert.slackness = {
      {"slackness_d1_cap", mult.a1 * (d1 - s1)},
      {"slackness_d2_cap", mult.a2 * (d2 - s2)},
      {"slackness_delta_d1", mult.b1 * cap1},
      {"slackness_delta_d2", mult.b2 * cap2},
      {"slackness_distortion", mult.c * dist},
  };
  cert.feasibility = {
      {"d1_positive", -d1},      {"d2_positive", -d2},    {"delta_positive", -delta},
      {"d1_cap", d1 - s1},       {"d2_cap", d2 - s2},     {"delta_via_d1", cap1},
      {"delta_via_d2", cap2},    {"distortion", dist},
  };

  try {
    cert.objective = general_objective(pd, point);
  } catch (const DomainError&) {
    cert.objective = std::nan("");
  }

  auto fail = [&cert](const std::string& name) {
    if (!cert.violation) cert.violation = name;
  };
  for (const auto& r : cert.stationarity) {
    if (!(std::abs(r.value) <= tol)) fail(r.name);
  }
  for (const auto& r : cert.slackness) {
    if (!(std::abs(r.value) <= tol)) fail(r.name);
  }
  for (const auto& r : cert.feasibility) {
    const bool strict = r.name.ends_with("_positive");
    if (strict ? !(r.value < 0.0) : !(r.value <= tol)) fail(r.name);
  }
  const std::pair<const char*, double> signs[] = {
      {"multiplier_a1", mult.a1}, {"multiplier_a2", mult.a2}, {"multiplier_b1", mult.b1},
      {"multiplier_b2", mult.b2}, {"multiplier_c", mult.c}};
  for (const auto& [name, value] : signs) {
    if (!(value >= 0.0)) fail(name);
  }
  cert.valid = !cert.violation.has_value();
  return cert;
}

KKTCertificate verify_kkt(const SourceModel& model, int k, int j, double d_k, Program program,
                          double tol) {
  return evaluate_kkt(model, k, j, d_k, program, candidate_minimizer(model, k, j, d_k, program),
                      kkt_multipliers(model, k, j, d_k, program), tol);
}

NumericOptimum solve_numeric(const SourceModel& model, int k, int j, double d_k, Program program) {
  check_program_case(model, k, j, program);
  check_distortion_interval(model, k, d_k);
  const ProgramData pd = program_data(model, k, j, d_k, program);

  // Largest feasible d2 for a given d1, then the largest delta both caps allow.
  auto best_point = [&pd, k](double d1) {
    FeasiblePoint pt;
    pt.d1 = d1;
    pt.d2 = pd.s2;
    if (k > 1 && pd.b > 0.0) {
      pt.d2 = std::min(pd.s2, (pd.budget - pd.a * d1) / ((k - 1.0) * pd.b));
    }
    if (!(pt.d2 > 0.0)) {
      pt.delta = 0.0;
      return pt;
    }
    pt.delta = std::min(delta_cap(d1, pd.w, pd.s1), delta_cap(pt.d2, pd.w, pd.s2));
    return pt;
  };
  auto f = [&](double d1) { return objective_or_inf(pd, best_point(d1)); };

  const double hi = pd.a > 0.0 ? std::min(pd.s1, pd.budget / pd.a) : pd.s1;
  double lo = 0.0;
  double up = hi;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = up - inv_phi * (up - lo);
  double x2 = lo + inv_phi * (up - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int iter = 0; iter < 400 && (up - lo) > 1e-15 * std::max(1.0, hi); ++iter) {
    if (f1 <= f2) {
      up = x2;
      x2 = x1;
      f2 = f1;
      x1 = up - inv_phi * (up - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (up - lo);
      f2 = f(x2);
    }
  }

  double best_d1 = f1 <= f2 ? x1 : x2;
  double best_f = std::min(f1, f2);
  if (const double fh = f(hi); fh <= best_f) {
    best_d1 = hi;
    best_f = fh;
  }
  if (!std::isfinite(best_f)) {
    throw DomainError("rate program has no feasible interior point at d_k");
  }
  return NumericOptimum{best_point(best_d1), best_f};
}

double dj_lower_bound(const SourceModel& model, int k, int j, double delta, Program program) {
  check_program_case(model, k, j, program);
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  const ModelSpectrum sj = spectrum(model, j);
  const double xj1 = sj.x.lambda1, sj1 = sj.s.lambda1;
  const double x2 = sj.x.lambda2, s2 = sj.s.lambda2;

  // Distortion of mode m as a function of its S-reconstruction error e:
  // (x/s)^2 e + x - x^2/s.
  auto mode = [](double x, double s, double e) { return (x / s) * (x / s) * e + x - x * x / s; };

  double e1 = 0.0;
  double e2 = 0.0;
  if (program == Program::p) {
    const double inner = 1.0 / delta + 1.0 / sj1 - 1.0 / s2;
    if (!(inner > 0.0)) throw DomainError("delta bound inverse is not positive");
    e1 = 1.0 / inner;
    e2 = delta;
  } else {
    const double inner = 1.0 / delta + 1.0 / s2 - 1.0 / sj1;
    if (!(inner > 0.0)) throw DomainError("delta bound inverse is not positive");
    e1 = delta;
    e2 = 1.0 / inner;
  }
  return mode(xj1, sj1, e1) / j + (j - 1.0) / j * mode(x2, s2, e2);
}

Eigen::MatrixXd sigma_identity(const Eigen::MatrixXd& gamma_u, const Eigen::MatrixXd& gamma_s,
                               const Eigen::MatrixXd& d) {
  const Eigen::LLT<Eigen::MatrixXd> llt(gamma_s);
  if (llt.info() != Eigen::Success) throw DomainError("Gamma_S is singular or not PD");
  const Eigen::MatrixXd m = llt.solve(gamma_u);  // Gs^-1 Gu
  Eigen::MatrixXd sigma = m.transpose() * d * m + gamma_u - gamma_u * m;
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::MatrixXd delta_bound(const Eigen::MatrixXd& d, double lambda_w,
                            const Eigen::MatrixXd& gamma_s) {
  if (!(lambda_w > 0.0)) throw DomainError("lambda_w must be positive");
  const Eigen::LLT<Eigen::MatrixXd> d_llt(d);
  const Eigen::LLT<Eigen::MatrixXd> s_llt(gamma_s);
  if (d_llt.info() != Eigen::Success) throw DomainError("D is not positive definite");
  if (s_llt.info() != Eigen::Success) throw DomainError("Gamma_S is singular or not PD");
  const auto n = d.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd inner = d_llt.solve(eye) - s_llt.solve(eye);
  inner.diagonal().array() += 1.0 / lambda_w;
  inner = 0.5 * (inner + inner.transpose());
  const Eigen::LLT<Eigen::MatrixXd> inner_llt(inner);
  if (inner_llt.info() != Eigen::Success) {
    throw DomainError("D^-1 + Lambda_W^-1 - Gamma_S^-1 is not positive definite");
  }
  Eigen::MatrixXd out = inner_llt.solve(eye);
  return 0.5 * (out + out.transpose());
}

}  // namespace ceo_rd
