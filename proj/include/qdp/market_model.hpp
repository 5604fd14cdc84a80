#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <vector>

#include "qdp/common.hpp"

namespace qdp {

struct GBMParams {
  double r = 0.0;
  Eigen::VectorXd sigmas;  // annualized, length d
  Eigen::MatrixXd rho;     // d x d correlation
  double dt = 1.0;         // years
  int d = 1;
  int T = 1;
  Eigen::VectorXd s0;  // length d

  // Single asset helper.
  static GBMParams single(double r, double sigma, double dt, int T, double s0) {
    GBMParams p;
    p.r = r;
    p.sigmas = Eigen::VectorXd::Constant(1, sigma);
    p.rho = Eigen::MatrixXd::Identity(1, 1);
    p.dt = dt;
    p.d = 1;
    p.T = T;
    p.s0 = Eigen::VectorXd::Constant(1, s0);
    return p;
  }
};

inline void validate(const GBMParams& p) {
  require(p.d >= 1, "d must be positive");
  require(p.T >= 1, "T must be positive");
  require(p.dt > 0.0, "dt must be positive");
  require(p.sigmas.size() == p.d, "sigmas length must equal d");
  require(p.s0.size() == p.d, "s0 length must equal d");
  require(p.rho.rows() == p.d && p.rho.cols() == p.d, "rho must be d x d");
  for (int i = 0; i < p.d; ++i) {
    require(p.sigmas[i] > 0.0, "sigmas must be positive");
    require(p.s0[i] > 0.0, "s0 must be positive");
    require(std::abs(p.rho(i, i) - 1.0) < 1e-12, "rho must have unit diagonal");
    for (int j = 0; j < p.d; ++j) {
      require(std::abs(p.rho(i, j) - p.rho(j, i)) < 1e-12, "rho must be symmetric");
      require(p.rho(i, j) >= -1.0 && p.rho(i, j) <= 1.0, "rho entries must lie in [-1,1]");
    }
  }
}

// Per-step covariance; includes the dt factor.
struct CovarianceMatrix {
  Eigen::MatrixXd sigma;
};

[[nodiscard]] inline CovarianceMatrix build_covariance(const GBMParams& p) {
  validate(p);
  CovarianceMatrix c;
  c.sigma.resize(p.d, p.d);
  for (int i = 0; i < p.d; ++i)
    for (int j = 0; j < p.d; ++j) c.sigma(i, j) = p.dt * p.rho(i, j) * p.sigmas[i] * p.sigmas[j];
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c.sigma).eigenvalues().minCoeff();
  if (!(lmin > 1e-14 * c.sigma.diagonal().maxCoeff())) {
    std::ostringstream os;
    os << "covariance is not positive-definite (min eigenvalue " << lmin << ")";
    throw InvalidInput(os.str());
  }
  return c;
}

// Lower-triangular L with L L^T = Sigma.
[[nodiscard]] inline Eigen::MatrixXd cholesky_factor(const CovarianceMatrix& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov.sigma);
  if (llt.info() != Eigen::Success) throw InvalidInput("cholesky: covariance is not positive-definite");
  return llt.matrixL();
}

enum class SigmaMaxReading { sqrt_eigenvalue, raw_eigenvalue };

// Width scale used for truncation bounds. Default is sqrt(lambda_max(Sigma)).
[[nodiscard]] inline double sigma_max(const CovarianceMatrix& cov,
                                      SigmaMaxReading reading = SigmaMaxReading::sqrt_eigenvalue) {
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov.sigma).eigenvalues().maxCoeff();
  return reading == SigmaMaxReading::sqrt_eigenvalue ? std::sqrt(lmax) : lmax;
}

// mu_j = (r - sigma_j^2 / 2) dt
[[nodiscard]] inline Eigen::VectorXd drift(const GBMParams& p) {
  Eigen::VectorXd mu(p.d);
  for (int j = 0; j < p.d; ++j) mu[j] = (p.r - 0.5 * p.sigmas[j] * p.sigmas[j]) * p.dt;
  return mu;
}

// T x d matrices; row t is timestep t+1.
using ReturnPath = Eigen::MatrixXd;
using PricePath = Eigen::MatrixXd;

[[nodiscard]] inline PricePath returns_to_prices(const Eigen::VectorXd& s0, const ReturnPath& path) {
  require(path.cols() == s0.size(), "path width must equal asset count");
  PricePath out(path.rows(), path.cols());
  for (Eigen::Index j = 0; j < path.cols(); ++j) {
    double cum = 0.0;
    for (Eigen::Index t = 0; t < path.rows(); ++t) {
      cum += path(t, j);
      out(t, j) = s0[j] * std::exp(cum);
    }
  }
  return out;
}

namespace detail {

struct GaussianForm {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_norm = 0.0;  // log((2 pi)^{d/2} det^{1/2})

  explicit GaussianForm(const Eigen::MatrixXd& cov) : llt(cov) {
    if (llt.info() != Eigen::Success) throw InvalidInput("covariance is not positive-definite");
    const Eigen::MatrixXd L = llt.matrixL();
    double logdet_half = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) logdet_half += std::log(L(i, i));
    log_norm = 0.5 * static_cast<double>(cov.rows()) * std::log(2.0 * std::numbers::pi) + logdet_half;
  }

  [[nodiscard]] double log_density(const Eigen::VectorXd& dev) const {
    const Eigen::VectorXd y = llt.matrixL().solve(dev);
    return -0.5 * y.squaredNorm() - log_norm;
  }
};

}  // namespace detail

// Multivariate log-normal transition density of S^t given S^{t-1}.
[[nodiscard]] inline double transition_density_price(const Eigen::VectorXd& s_t, const Eigen::VectorXd& s_prev,
                                                     const GBMParams& p) {
  require(s_t.size() == p.d && s_prev.size() == p.d, "price vectors must have length d");
  for (int j = 0; j < p.d; ++j) require(s_t[j] > 0.0 && s_prev[j] > 0.0, "prices must be positive");
  const auto cov = build_covariance(p);
  const detail::GaussianForm g(cov.sigma);
  const Eigen::VectorXd mu = drift(p);
  Eigen::VectorXd dev(p.d);
  double log_jac = 0.0;
  for (int j = 0; j < p.d; ++j) {
    dev[j] = std::log(s_t[j]) - (mu[j] + std::log(s_prev[j]));
    log_jac += std::log(s_t[j]);
  }
  return std::exp(g.log_density(dev) - log_jac);
}

// log of the joint density of T i.i.d. N(mu, cov) return vectors (rows of path).
[[nodiscard]] inline double log_joint_density_return(const ReturnPath& path, const Eigen::VectorXd& mu,
                                                     const Eigen::MatrixXd& cov) {
  require(path.cols() == mu.size() && cov.rows() == mu.size(), "dimension mismatch");
  const detail::GaussianForm g(cov);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < path.rows(); ++t) acc += g.log_density(path.row(t).transpose() - mu);
  return acc;
}

[[nodiscard]] inline double joint_density_return(const ReturnPath& path, const Eigen::VectorXd& mu,
                                                 const Eigen::MatrixXd& cov) {
  return std::exp(log_joint_density_return(path, mu, cov));
}

[[nodiscard]] inline double joint_density_return(const ReturnPath& path, const GBMParams& p) {
  return joint_density_return(path, drift(p), build_covariance(p).sigma);
}

// Midpoint grid over per-step log-returns. Cell i covers [lower + i dx, lower + (i+1) dx).
struct GridSpec {
  int n = 3;
  double w = 5.0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  [[nodiscard]] int dims() const { return static_cast<int>(lower.size()); }
  [[nodiscard]] std::int64_t cells() const { return std::int64_t{1} << n; }
  [[nodiscard]] double dx(int j) const { return (upper[j] - lower[j]) / static_cast<double>(cells()); }
  [[nodiscard]] double midpoint(int j, std::int64_t i) const {
    return lower[j] + (static_cast<double>(i) + 0.5) * dx(j);
  }
};

inline void validate(const GridSpec& g) {
  require(g.n >= 1 && g.n <= 26, "grid n must lie in [1,26]");
  require(g.w > 0.0, "grid w must be positive");
  require(g.lower.size() == g.upper.size() && g.lower.size() >= 1, "grid bounds size mismatch");
  for (int j = 0; j < g.dims(); ++j) require(g.upper[j] > g.lower[j], "grid requires B_u > B_l");
}

// Bounds mu_j -/+ w sigma_max per asset.
[[nodiscard]] inline GridSpec make_grid(const GBMParams& p, int n, double w,
                                        SigmaMaxReading reading = SigmaMaxReading::sqrt_eigenvalue) {
  const double smax = sigma_max(build_covariance(p), reading);
  const Eigen::VectorXd mu = drift(p);
  GridSpec g{n, w, mu.array() - w * smax, mu.array() + w * smax};
  validate(g);
  return g;
}

// [-w, w] in one dimension.
[[nodiscard]] inline GridSpec standard_grid(int n, double w) {
  GridSpec g{n, w, Eigen::VectorXd::Constant(1, -w), Eigen::VectorXd::Constant(1, w)};
  validate(g);
  return g;
}

struct Lattice {
  std::vector<std::vector<double>> midpoints;  // [dim][cell]
  std::vector<std::vector<double>> pmf;        // marginal density(x) dx, [dim][cell]
  [[nodiscard]] double mass(int j) const {
    KahanSum s;
    for (double v : pmf[j]) s.add(v);
    return s.value();
  }
};

[[nodiscard]] inline double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Marginal lattice with explicit mean and per-step std per dimension.
[[nodiscard]] inline Lattice lattice(const GridSpec& g, const Eigen::VectorXd& mean, const Eigen::VectorXd& sd) {
  validate(g);
  require(mean.size() == g.dims() && sd.size() == g.dims(), "lattice moments size mismatch");
  Lattice out;
  out.midpoints.resize(g.dims());
  out.pmf.resize(g.dims());
  for (int j = 0; j < g.dims(); ++j) {
    const double dx = g.dx(j);
    for (std::int64_t i = 0; i < g.cells(); ++i) {
      const double x = g.midpoint(j, i);
      out.midpoints[j].push_back(x);
      out.pmf[j].push_back(normal_pdf(x, mean[j], sd[j]) * dx);
    }
  }
  return out;
}

[[nodiscard]] inline Lattice lattice(const GridSpec& g, const GBMParams& p) {
  const auto cov = build_covariance(p);
  return lattice(g, drift(p), cov.sigma.diagonal().cwiseSqrt());
}

// Joint per-step pmf over the d-dimensional grid, mixed-radix index with dimension 0 fastest.
struct StepLattice {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> pmf;
};

[[nodiscard]] inline StepLattice step_lattice(const GridSpec& g, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov) {
  validate(g);
  const int d = g.dims();
  require(mu.size() == d && cov.rows() == d, "step lattice dimension mismatch");
  require(static_cast<std::int64_t>(g.n) * d <= 26, "step lattice too large");
  const detail::GaussianForm form(cov);
  double vol = 1.0;
  for (int j = 0; j < d; ++j) vol *= g.dx(j);
  const std::int64_t total = std::int64_t{1} << (g.n * d);
  StepLattice s;
  s.points.reserve(total);
  s.pmf.reserve(total);
  Eigen::VectorXd x(d);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    for (int j = 0; j < d; ++j) {
      x[j] = g.midpoint(j, rem & (g.cells() - 1));
      rem >>= g.n;
    }
    s.points.push_back(x);
    s.pmf.push_back(std::exp(form.log_density(x - mu)) * vol);
  }
  return s;
}

[[nodiscard]] inline StepLattice step_lattice(const GridSpec& g, const GBMParams& p) {
  return step_lattice(g, drift(p), build_covariance(p).sigma);
}

}  // namespace qdp
