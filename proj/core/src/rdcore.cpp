#include "ceo_rd/rdcore.hpp"

#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ceo_rd/errors.hpp"

namespace ceo_rd {
namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void check_k(const SourceModel& model, int k) {
  if (k < 1 || k > model.ell()) {
    throw DomainError("cooperation level k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(model.ell()) + "]");
  }
}

// lambda1 (lambda_noise + q) / (lambda_signal + noise + q), zero when the mode is empty.
double mode_distortion(double lx, double lz, double ls, double q) {
  if (lx == 0.0) return 0.0;
  return lx * (lz + q) / (ls + q);
}

ConditionValue verdict_of(double value) {
  return ConditionValue{value >= 0.0 ? Verdict::holds : Verdict::fails, value};
}

ConditionValue not_applicable() {
  return ConditionValue{Verdict::not_applicable, std::nan("")};
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::not_applicable: return "n/a";
    case Verdict::redundant: return "redundant";
  }
  return "?";
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::always: return "always";
    case Regime::near_dmin: return "near-dmin";
    case Regime::both_ends: return "both-ends";
    case Regime::degenerate_x: return "degenerate-x";
  }
  return "?";
}

void check_distortion_interval(const SourceModel& model, int k, double d_k) {
  check_k(model, k);
  const double lo = d_min(model, k);
  const double hi = model.gamma_x();
  if (!std::isfinite(d_k) || d_k <= lo + kIntervalMargin || d_k >= hi - kIntervalMargin) {
    std::string which = d_k <= lo + kIntervalMargin ? "d_min^(" + std::to_string(k) + ")=" + num(lo)
                                                    : "gamma_x=" + num(hi);
    throw DomainError("d_k=" + num(d_k) + " must lie strictly inside (d_min^(" +
                      std::to_string(k) + ")=" + num(lo) + ", gamma_x=" + num(hi) +
                      "); violated bound: " + which);
  }
}

double distortion_at(const SourceModel& model, int j, double lambda_q) {
  const ModelSpectrum sp = spectrum(model, j);
  const double first = mode_distortion(sp.x.lambda1, sp.z.lambda1, sp.s.lambda1, lambda_q);
  const double second = mode_distortion(sp.x.lambda2, sp.z.lambda2, sp.s.lambda2, lambda_q);
  return first / j + (j - 1.0) / j * second;
}

double rate_at(const SourceModel& model, int k, double lambda_q) {
  const ModelSpectrum sp = spectrum(model, k);
  return (std::log1p(sp.s.lambda1 / lambda_q) + (k - 1.0) * std::log1p(sp.s.lambda2 / lambda_q)) /
         (2.0 * k);
}

double solve_lambda_q(const SourceModel& model, int k, double d_k) {
  check_distortion_interval(model, k, d_k);

  double hi = 1.0;
  while (distortion_at(model, k, hi) <= d_k) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw DomainError("lambda_q bracket overflow for d_k=" + num(d_k));
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (distortion_at(model, k, mid) < d_k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Pick whichever endpoint lands closer; both bracket the root to one ulp.
  const double flo = lo > 0.0 ? std::abs(distortion_at(model, k, lo) - d_k) : INFINITY;
  const double fhi = std::abs(distortion_at(model, k, hi) - d_k);
  return flo < fhi ? lo : hi;
}

double rate_bar(const SourceModel& model, int k, double d_k) {
  return rate_at(model, k, solve_lambda_q(model, k, d_k));
}

std::vector<double> distortion_profile(const SourceModel& model, int k, double d_k) {
  const double q = solve_lambda_q(model, k, d_k);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(model.ell() - k + 1));
  for (int j = k; j <= model.ell(); ++j) out.push_back(distortion_at(model, j, q));
  return out;
}

double mu_schur_form(const SourceModel& model, int k, double lambda_q) {
  const ModelSpectrum sp = spectrum(model, k);
  const double l1 = sp.s.lambda1;
  const double l2 = sp.s.lambda2;
  return (l2 - l2 * l2 / (l2 + lambda_q)) / (l1 - l1 * l1 / (l1 + lambda_q));
}

MuNu mu_nu(const SourceModel& model, int k, double d_k) {
  MuNu out;
  out.lambda_q = solve_lambda_q(model, k, d_k);
  const double q = out.lambda_q;
  const ModelSpectrum sp = spectrum(model, k);
  const double l1 = sp.s.lambda1;
  const double l2 = sp.s.lambda2;
  if (l1 > 0.0) {
    out.mu = l2 * (l1 + q) / (l1 * (l2 + q));
#ifndef NDEBUG
    if (l2 > 0.0) {
      const double literal = mu_schur_form(model, k, q);
      assert(std::abs(literal - *out.mu) <= 1e-8 * std::max(1.0, std::abs(literal)));
    }
#endif
  }
  if (l2 > 0.0) out.nu = l1 * (l2 + q) / (l2 * (l1 + q));
  for (int j = k; j <= model.ell(); ++j) {
    if (l2 > 0.0) {
      const double lj = spectrum(model, j).s.lambda1;
      out.nu_kj.emplace_back(lj * (l2 + q) / ((lj + q) * l2));
    } else {
      out.nu_kj.emplace_back(std::nullopt);
    }
  }
  return out;
}

RegimeReport classify_regime(const SourceModel& model, int k) {
  check_k(model, k);
  const ModelSpectrum sp = spectrum(model, k);
  const double x1 = sp.x.lambda1, x2 = sp.x.lambda2;
  const double s1 = sp.s.lambda1, s2 = sp.s.lambda2;

  RegimeReport rep;
  if (model.s.rho >= 0.0) {
    rep.branch = RatioBranch::mu;
    rep.quadratic_coeff = (k - 1.0) * x2 * x2 * s1 * s1;
    rep.constant_term = k * x1 * x1 * s2 * s2;
    rep.limit_ratio = s2 / s1;
    // rho_S = 1: mu vanishes and the condition holds with equality.
    if (s2 == 0.0) return rep;
  } else {
    rep.branch = RatioBranch::nu;
    rep.quadratic_coeff = x1 * x1 * s2 * s2;
    rep.constant_term = k * x2 * x2 * s1 * s1;
    rep.limit_ratio = s1 / s2;
    if (s1 == 0.0) return rep;
  }

  const double p = rep.quadratic_coeff;
  const double c = rep.constant_term;
  if (p <= 4.0 * c) {
    rep.regime = Regime::always;
    return rep;
  }
  const double root = 0.5 * std::sqrt(1.0 - 4.0 * c / p);
  const double r1 = 0.5 - root;
  const double r2 = 0.5 + root;
  rep.roots = std::make_pair(r1, r2);

  const double floor_ratio = rep.limit_ratio;
  if (r2 <= floor_ratio) {
    rep.regime = Regime::always;
  } else if (c == 0.0) {
    rep.regime = Regime::degenerate_x;
  } else if (r1 <= floor_ratio) {
    rep.regime = Regime::near_dmin;
  } else {
    rep.regime = Regime::both_ends;
  }
  return rep;
}

bool ConditionReport::profile_matches(int j) const {
  if (cond1.verdict == Verdict::holds) return true;
  const auto idx = static_cast<std::size_t>(j - k);
  if (idx >= cond3.size()) return false;
  const Verdict v3 = cond3[idx].verdict;
  const Verdict v4 = cond4[idx].verdict;
  return (v3 == Verdict::holds || v3 == Verdict::redundant) && v4 == Verdict::holds;
}

ConditionReport check_conditions(const SourceModel& model, int k, double d_k) {
  ConditionReport rep;
  rep.k = k;
  rep.d_k = d_k;
  const MuNu ratios = mu_nu(model, k, d_k);
  rep.lambda_q = ratios.lambda_q;
  rep.mu = ratios.mu;
  rep.nu = ratios.nu;
  rep.nu_kj = ratios.nu_kj;
  rep.rho_s_nonnegative = model.s.rho >= 0.0;
  rep.rho_s_nonpositive = model.s.rho <= 0.0;

  const ModelSpectrum sp = spectrum(model, k);
  const double x1 = sp.x.lambda1, x2 = sp.x.lambda2;
  const double s1 = sp.s.lambda1, s2 = sp.s.lambda2;
  const double lead = x1 * x1 * s2 * s2;   // (lambda_X1^(k))^2 lambda_S2^2
  const double rep_w = x2 * x2 * s1 * s1;  // lambda_X2^2 (lambda_S1^(k))^2

  if (rep.rho_s_nonnegative && rep.mu) {
    const double mu = *rep.mu;
    rep.cond1 = verdict_of((k - 1.0) * rep_w * mu * (mu - 1.0) + k * lead);
  } else {
    rep.cond1 = not_applicable();
  }

  if (rep.rho_s_nonpositive && rep.nu) {
    const double nu = *rep.nu;
    rep.cond2 = verdict_of(lead * nu * (nu - 1.0) + k * rep_w);
  } else {
    rep.cond2 = not_applicable();
  }

  for (int j = k; j <= model.ell(); ++j) {
    const auto& nkj = ratios.nu_kj[static_cast<std::size_t>(j - k)];
    const double sj1 = spectrum(model, j).s.lambda1;
    if (!rep.rho_s_nonpositive || !rep.nu || !nkj || !(sj1 > 0.0)) {
      rep.cond3.push_back(not_applicable());
      rep.cond4.push_back(not_applicable());
      continue;
    }
    const double nu = *rep.nu;
    const double v = *nkj;
    ConditionValue c3 = verdict_of((v + (k - 1.0)) * lead * nu * nu + (k - 1.0) * (v - nu) * rep_w);
    if (j == k) c3.verdict = Verdict::redundant;
    rep.cond3.push_back(c3);
    rep.cond4.push_back(verdict_of((v - 1.0) * lead * nu * nu + ((k - 1.0) * v + nu) * rep_w));
  }

  rep.regime = classify_regime(model, k);
  return rep;
}

DegeneratePoint degenerate_rate_s2zero(const SourceModel& model, int k, int j, double d_k) {
  check_distortion_interval(model, k, d_k);
  if (spectrum(model, k).s.lambda2 != 0.0) {
    throw DomainError("degenerate_rate_s2zero needs lambda_S2 = 0 (rho_S = 1)");
  }
  if (j < k || j > model.ell()) {
    throw DomainError("j=" + std::to_string(j) + " outside [k, ell]");
  }
  const double gx = model.x.gamma;
  const double gz = model.z.gamma;
  const double gs = model.s.gamma;
  const double arg = gx * gx / (gs * d_k - gx * gz);
  if (!(arg > 0.0) || !std::isfinite(arg)) {
    throw DomainError("degenerate rate log argument is not positive at d_k=" + num(d_k));
  }
  DegeneratePoint out;
  out.rate = std::log(arg) / (2.0 * k);
  out.d_j = ((j - k) * gx * gx * gz + (k * gs - j * gz) * gx * d_k) /
            ((j * gs - k * gz) * gx - (j - k) * gs * d_k);
  return out;
}

double degenerate_rate_s1zero(const SourceModel& model, double d_ell) {
  const int ell = model.ell();
  check_distortion_interval(model, ell, d_ell);
  const ModelSpectrum sp = spectrum(model, ell);
  if (sp.s.lambda1 != 0.0) {
    throw DomainError("degenerate_rate_s1zero needs lambda_S1^(ell) = 0 (rho_S = -1/(ell-1))");
  }
  const double x2 = sp.x.lambda2;
  const double arg = (ell - 1.0) * x2 * x2 /
                     (ell * sp.s.lambda2 * d_ell - (ell - 1.0) * x2 * sp.z.lambda2);
  if (!(arg > 0.0) || !std::isfinite(arg)) {
    throw DomainError("degenerate rate log argument is not positive at d_ell=" + num(d_ell));
  }
  return (ell - 1.0) / (2.0 * ell) * std::log(arg);
}

}  // namespace ceo_rd
