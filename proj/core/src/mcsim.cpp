#include "ceo_rd/mcsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "ceo_rd/errors.hpp"

namespace ceo_rd {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Running mean and sum of squared deviations per coordinate. Blocks are merged
// with the pairwise update so the reduction order is fixed by block index.
struct Moments {
  std::int64_t count = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  explicit Moments(Eigen::Index dim = 0)
      : mean(Eigen::VectorXd::Zero(dim)), m2(Eigen::VectorXd::Zero(dim)) {}

  void add(const Eigen::VectorXd& v) {
    ++count;
    const Eigen::VectorXd d = v - mean;
    mean += d / static_cast<double>(count);
    m2.array() += d.array() * (v - mean).array();
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double total = na + nb;
    const Eigen::VectorXd d = other.mean - mean;
    mean += d * (nb / total);
    m2 += other.m2 + (d.array().square() * (na * nb / total)).matrix();
    count += other.count;
  }

  [[nodiscard]] Eigen::VectorXd standard_error() const {
    if (count < 2) {
      return Eigen::VectorXd::Constant(mean.size(), std::numeric_limits<double>::infinity());
    }
    const double c = static_cast<double>(count);
    return (m2.array() / (c - 1.0) / c).sqrt().matrix();
  }
};

unsigned resolve_threads(const SimOptions& options) {
  if (options.threads != 0) return options.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls body(begin, end, block) for every block of [0, n), possibly in parallel.
template <class Body>
void for_each_block(std::int64_t n, const SimOptions& options, Body&& body) {
  const std::int64_t blocks = (n + kSimBlockSize - 1) / kSimBlockSize;
  auto run_block = [&](std::int64_t b) {
    const std::int64_t begin = b * kSimBlockSize;
    body(begin, std::min(n, begin + kSimBlockSize), b);
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<std::int64_t>(resolve_threads(options), blocks));
  if (threads <= 1) {
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::int64_t b = next++; b < blocks; b = next++) run_block(b);
    });
  }
}

template <class Accumulate>
Moments reduce_moments(std::int64_t n, Eigen::Index dim, const SimOptions& options,
                       Accumulate&& accumulate) {
  const std::int64_t blocks = (n + kSimBlockSize - 1) / kSimBlockSize;
  std::vector<Moments> partial(static_cast<std::size_t>(blocks), Moments(dim));
  for_each_block(n, options, [&](std::int64_t begin, std::int64_t end, std::int64_t b) {
    accumulate(begin, end, partial[static_cast<std::size_t>(b)]);
  });
  Moments total(dim);
  for (const Moments& m : partial) total.merge(m);
  return total;
}

// Square roots of the spectral weights that turn white noise into a draw from
// the symmetric covariance via Theta * Lambda^(1/2).
struct Factor {
  double root1 = 0.0;
  double root2 = 0.0;
};

Factor factor(const SymmetricSpec& spec) {
  const SpectralView v = eigenvalues(spec, spec.ell);
  return Factor{std::sqrt(std::max(0.0, v.lambda1)), std::sqrt(std::max(0.0, v.lambda2))};
}

void draw_symmetric(NormalStream& rng, const Factor& f, Eigen::Ref<Eigen::VectorXd> out) {
  out(0) = f.root1 * rng.next();
  for (Eigen::Index i = 1; i < out.size(); ++i) out(i) = f.root2 * rng.next();
  apply_basis(out);
}

void draw_white(NormalStream& rng, double scale, Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = scale * rng.next();
}

// One joint draw of (X, Z) in dimension ell; every sample consumes its stream in
// the order X, Z, Q, auxiliary.
struct Draw {
  Eigen::VectorXd x, z, s, q, aux;
  explicit Draw(int ell) : x(ell), z(ell), s(ell), q(ell), aux(ell) {}
};

void check_sample_count(std::int64_t n) {
  if (n < 1) throw DomainError("sample count must be >= 1, got " + std::to_string(n));
}

}  // namespace

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t index)
    : key_(splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL))) {}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  auto uniform = [this] {
    const std::uint64_t bits = splitmix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;  // open interval (0, 1)
  };
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

SampleBatch sample(const SourceModel& model, std::int64_t n, std::uint64_t seed,
                   const SimOptions& options) {
  check_sample_count(n);
  const int ell = model.ell();
  SampleBatch batch;
  batch.n = n;
  batch.seed = seed;
  batch.ell = ell;
  const auto size = static_cast<std::size_t>(n) * static_cast<std::size_t>(ell);
  batch.x.resize(size);
  batch.z.resize(size);
  batch.s.resize(size);

  const Factor fx = factor(model.x);
  const Factor fz = factor(model.z);
  for_each_block(n, options, [&](std::int64_t begin, std::int64_t end, std::int64_t) {
    Draw d(ell);
    for (std::int64_t t = begin; t < end; ++t) {
      NormalStream rng(seed, static_cast<std::uint64_t>(t));
      draw_symmetric(rng, fx, d.x);
      draw_symmetric(rng, fz, d.z);
      const auto off = static_cast<std::size_t>(t) * static_cast<std::size_t>(ell);
      for (int i = 0; i < ell; ++i) {
        batch.x[off + i] = d.x(i);
        batch.z[off + i] = d.z(i);
        batch.s[off + i] = d.x(i) + d.z(i);
      }
    }
  });
  return batch;
}

namespace {

EmpiricalRD run_distortion(const SourceModel& model, int k, double lambda_q, int j_lo, int j_hi,
                           std::int64_t n, std::uint64_t seed, const SimOptions& options) {
  const int ell = model.ell();
  if (k < 1 || k > ell) throw DomainError("k must lie in [1, ell]");
  if (j_lo < k || j_hi > ell) throw DomainError("j must lie in [k, ell]");
  if (!(lambda_q > 0.0) || !std::isfinite(lambda_q)) {
    throw DomainError("lambda_q must be positive and finite");
  }
  check_sample_count(n);

  // Dense conditional-mean gains, one per j.
  std::vector<Eigen::MatrixXd> gain;
  for (int j = j_lo; j <= j_hi; ++j) {
    Eigen::MatrixXd sv = dense(model.s, j);
    sv.diagonal().array() += lambda_q;
    gain.push_back(sv.ldlt().solve(dense(model.x, j)).transpose());
  }

  const Factor fx = factor(model.x);
  const Factor fz = factor(model.z);
  const double q_scale = std::sqrt(lambda_q);
  const auto dim = static_cast<Eigen::Index>(gain.size());
  const Moments m = reduce_moments(n, dim, options, [&](std::int64_t begin, std::int64_t end,
                                                         Moments& acc) {
    Draw d(ell);
    Eigen::VectorXd err(dim);
    for (std::int64_t t = begin; t < end; ++t) {
      NormalStream rng(seed, static_cast<std::uint64_t>(t));
      draw_symmetric(rng, fx, d.x);
      draw_symmetric(rng, fz, d.z);
      draw_white(rng, q_scale, d.q);
      const Eigen::VectorXd v = d.x + d.z + d.q;
      for (Eigen::Index g = 0; g < dim; ++g) {
        const Eigen::Index j = gain[g].rows();
        err(g) = (d.x.head(j) - gain[g] * v.head(j)).squaredNorm() / static_cast<double>(j);
      }
      acc.add(err);
    }
  });

  EmpiricalRD out;
  out.k = k;
  out.lambda_q = lambda_q;
  out.n = n;
  out.seed = seed;
  const Eigen::VectorXd se = m.standard_error();
  for (Eigen::Index g = 0; g < dim; ++g) {
    out.points.push_back({j_lo + static_cast<int>(g), m.mean(g), se(g)});
  }
  return out;
}

}  // namespace

EmpiricalRD empirical_distortion(const SourceModel& model, int k, double lambda_q, int j,
                                 std::int64_t n, std::uint64_t seed, const SimOptions& options) {
  return run_distortion(model, k, lambda_q, j, j, n, seed, options);
}

EmpiricalRD empirical_profile(const SourceModel& model, int k, double lambda_q, std::int64_t n,
                              std::uint64_t seed, const SimOptions& options) {
  return run_distortion(model, k, lambda_q, k, model.ell(), n, seed, options);
}

double admissible_lambda_w_bound(const SourceModel& model, int j) {
  const ModelSpectrum sp = spectrum(model, j);
  return std::min(sp.s.lambda1, sp.s.lambda2);
}

DecompositionReport decomposition_check(const SourceModel& model, int j, double lambda_w,
                                        double lambda_q, std::int64_t n, std::uint64_t seed,
                                        const SimOptions& options) {
  const int ell = model.ell();
  if (j < 1 || j > ell) throw DomainError("j must lie in [1, ell]");
  const double bound = admissible_lambda_w_bound(model, j);
  if (!(lambda_w > 0.0 && lambda_w < bound)) {
    throw DomainError("lambda_w must lie in (0, min(lambda_S1^(j), lambda_S2)) = (0, " +
                      std::to_string(bound) + "), got " + std::to_string(lambda_w));
  }
  if (!(lambda_q > 0.0) || !std::isfinite(lambda_q)) {
    throw DomainError("lambda_q must be positive and finite");
  }
  check_sample_count(n);

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(j, j);
  const Eigen::MatrixXd gs = dense(model.s, j);
  const Eigen::MatrixXd gu = gs - lambda_w * eye;
  const Eigen::LLT<Eigen::MatrixXd> gs_llt(gs);
  const Eigen::MatrixXd m_us = gs_llt.solve(gu).transpose();  // Gu Gs^-1
  Eigen::MatrixXd cond_u = gu - m_us * gu;                      // Cov(U | S)
  cond_u = 0.5 * (cond_u + cond_u.transpose());
  const Eigen::MatrixXd l_u = cond_u.llt().matrixL();

  Eigen::MatrixXd gv = gs;
  gv.diagonal().array() += lambda_q;
  const Eigen::MatrixXd s_gain = gv.ldlt().solve(gs).transpose();  // S_hat = s_gain V
  const Eigen::MatrixXd u_gain = gv.ldlt().solve(gu).transpose();  // U_hat = u_gain V

  // Conditional mean of S given (U, V).
  Eigen::MatrixXd joint(2 * j, 2 * j);
  joint << gu, gu, gu, gv;
  Eigen::MatrixXd cross(j, 2 * j);
  cross << gu, gs;
  const Eigen::MatrixXd uv_gain = joint.ldlt().solve(cross.transpose()).transpose();

  const Factor fx = factor(model.x);
  const Factor fz = factor(model.z);
  const double q_scale = std::sqrt(lambda_q);
  const Eigen::Index jj = static_cast<Eigen::Index>(j) * j;
  const Moments mom = reduce_moments(n, 2 * jj, options, [&](std::int64_t begin, std::int64_t end,
                                                              Moments& acc) {
    Draw d(ell);
    Eigen::VectorXd stat(2 * jj);
    Eigen::VectorXd uv(2 * j);
    for (std::int64_t t = begin; t < end; ++t) {
      NormalStream rng(seed, static_cast<std::uint64_t>(t));
      draw_symmetric(rng, fx, d.x);
      draw_symmetric(rng, fz, d.z);
      draw_white(rng, q_scale, d.q);
      draw_white(rng, 1.0, d.aux);
      const Eigen::VectorXd s = (d.x + d.z).head(j);
      const Eigen::VectorXd v = s + d.q.head(j);
      const Eigen::VectorXd u = m_us * s + l_u * d.aux.head(j);
      const Eigen::VectorXd es = s - s_gain * v;
      const Eigen::VectorXd eu = u - u_gain * v;
      const Eigen::VectorXd mes = m_us * es;
      uv << u, v;
      const Eigen::VectorXd r = s - uv_gain * uv;
      Eigen::Map<Eigen::MatrixXd> sig(stat.data(), j, j);
      Eigen::Map<Eigen::MatrixXd> del(stat.data() + jj, j, j);
      sig.noalias() = eu * eu.transpose() - mes * mes.transpose();
      del.noalias() = r * r.transpose();
      acc.add(stat);
    }
  });

  DecompositionReport rep;
  rep.j = j;
  rep.lambda_w = lambda_w;
  rep.lambda_q = lambda_q;
  rep.n = n;
  const Eigen::VectorXd se = mom.standard_error();
  rep.sigma_mean = Eigen::Map<const Eigen::MatrixXd>(mom.mean.data(), j, j);
  rep.sigma_se = Eigen::Map<const Eigen::MatrixXd>(se.data(), j, j);
  rep.delta_mean = Eigen::Map<const Eigen::MatrixXd>(mom.mean.data() + jj, j, j);
  rep.delta_se = Eigen::Map<const Eigen::MatrixXd>(se.data() + jj, j, j);
  rep.sigma_expected = cond_u;
  rep.delta_diagonal_expected = lambda_w * lambda_q / (lambda_w + lambda_q);

  auto z_score = [](double diff, double err) {
    if (diff == 0.0) return 0.0;
    return err > 0.0 ? std::abs(diff) / err : std::numeric_limits<double>::infinity();
  };
  for (int r = 0; r < j; ++r) {
    for (int c = 0; c < j; ++c) {
      rep.sigma_max_z = std::max(
          rep.sigma_max_z, z_score(rep.sigma_mean(r, c) - rep.sigma_expected(r, c), rep.sigma_se(r, c)));
      const double z = r == c ? z_score(rep.delta_mean(r, c) - rep.delta_diagonal_expected,
                                        rep.delta_se(r, c))
                              : z_score(rep.delta_mean(r, c), rep.delta_se(r, c));
      if (r == c) {
        rep.delta_diag_max_z = std::max(rep.delta_diag_max_z, z);
      } else {
        rep.delta_offdiag_max_z = std::max(rep.delta_offdiag_max_z, z);
      }
    }
  }
  rep.sigma_pass = rep.sigma_max_z <= rep.gate;
  rep.delta_pass = rep.delta_offdiag_max_z <= rep.gate && rep.delta_diag_max_z <= rep.gate;
  return rep;
}

}  // namespace ceo_rd
