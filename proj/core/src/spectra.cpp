#include "ceo_rd/spectra.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ceo_rd/errors.hpp"

namespace ceo_rd {
namespace {

double snap(double lambda) { return std::abs(lambda) <= kPsdSlack ? 0.0 : lambda; }

void require_psd(const SymmetricSpec& spec, const char* name) {
  const double l1 = spec.lambda1(spec.ell);
  const double l2 = spec.lambda2();
  if (l1 < -kPsdSlack) {
    throw DomainError(std::string("covariance of ") + name + " is not PSD: lambda1(" +
                      std::to_string(spec.ell) + ") = (1+(ell-1)*rho)*gamma = " +
                      std::to_string(l1) + " < 0");
  }
  if (l2 < -kPsdSlack) {
    throw DomainError(std::string("covariance of ") + name +
                      " is not PSD: lambda2 = (1-rho)*gamma = " + std::to_string(l2) + " < 0");
  }
}

}  // namespace

SourceModel validate(const SymmetricSpec& x, const SymmetricSpec& z) {
  if (x.ell != z.ell) {
    throw DomainError("signal and noise dimensions differ: " + std::to_string(x.ell) + " vs " +
                      std::to_string(z.ell));
  }
  if (x.ell < 2) {
    throw DomainError("ell must be at least 2, got " + std::to_string(x.ell));
  }
  if (!(x.gamma > 0.0) || !std::isfinite(x.gamma)) {
    throw DomainError("gamma_x must be positive, got " + std::to_string(x.gamma));
  }
  if (!(z.gamma >= 0.0) || !std::isfinite(z.gamma)) {
    throw DomainError("gamma_z must be nonnegative, got " + std::to_string(z.gamma));
  }
  if (!std::isfinite(x.rho) || !std::isfinite(z.rho)) {
    throw DomainError("correlation coefficients must be finite");
  }
  require_psd(x, "X");
  require_psd(z, "Z");

  SymmetricSpec s;
  s.ell = x.ell;
  s.gamma = x.gamma + z.gamma;
  s.rho = (x.rho * x.gamma + z.rho * z.gamma) / s.gamma;
  require_psd(s, "S");
  return SourceModel{x, z, s};
}

SpectralView eigenvalues(const SymmetricSpec& spec, int j) {
  if (j < 1 || j > spec.ell) {
    throw std::out_of_range("sub-dimension j=" + std::to_string(j) + " outside [1, " +
                            std::to_string(spec.ell) + "]");
  }
  return SpectralView{j, snap(spec.lambda1(j)), snap(spec.lambda2())};
}

ModelSpectrum spectrum(const SourceModel& model, int j) {
  const SpectralView x = eigenvalues(model.x, j);
  const SpectralView z = eigenvalues(model.z, j);
  const SpectralView s{j, snap(x.lambda1 + z.lambda1), snap(x.lambda2 + z.lambda2)};
  return ModelSpectrum{x, z, s};
}

void apply_basis(Eigen::Ref<Eigen::VectorXd> y) {
  const auto j = y.size();
  if (j <= 1) return;
  // Householder vector v = e_1 - u with u = 1/sqrt(j) * 1; v.v = 2 - 2/sqrt(j).
  const double inv_sqrt_j = 1.0 / std::sqrt(static_cast<double>(j));
  const double vv = 2.0 - 2.0 * inv_sqrt_j;
  const double vy = y(0) - inv_sqrt_j * y.sum();
  const double scale = 2.0 * vy / vv;
  y(0) -= scale * (1.0 - inv_sqrt_j);
  y.tail(j - 1).array() += scale * inv_sqrt_j;
}

Eigen::MatrixXd basis(int j) {
  if (j < 1) throw std::out_of_range("basis dimension must be >= 1");
  Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(j, j);
  for (int c = 0; c < j; ++c) {
    Eigen::VectorXd col = theta.col(c);
    apply_basis(col);
    theta.col(c) = col;
  }
  return theta;
}

Eigen::MatrixXd reconstruct(const SpectralView& view) {
  const Eigen::MatrixXd theta = basis(view.j);
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(view.j, view.lambda2);
  diag(0) = view.lambda1;
  return theta * diag.asDiagonal() * theta.transpose();
}

Eigen::MatrixXd dense(const SymmetricSpec& spec, int j) {
  if (j < 1) throw std::out_of_range("dense dimension must be >= 1");
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(j, j, spec.rho * spec.gamma);
  m.diagonal().setConstant(spec.gamma);
  return m;
}

double d_min(const SourceModel& model, int j) {
  const ModelSpectrum sp = spectrum(model, j);
  const double first = sp.s.lambda1 == 0.0 ? 0.0 : sp.x.lambda1 * sp.z.lambda1 / sp.s.lambda1;
  const double second = sp.s.lambda2 == 0.0 ? 0.0 : sp.x.lambda2 * sp.z.lambda2 / sp.s.lambda2;
  return first / j + (j - 1.0) / j * second;
}

}  // namespace ceo_rd
