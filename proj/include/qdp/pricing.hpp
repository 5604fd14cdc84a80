#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "qdp/common.hpp"
#include "qdp/contracts.hpp"
#include "qdp/market_model.hpp"

namespace qdp {

// splitmix64 stream keyed by (seed, path); satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  CounterRng(std::uint64_t seed, std::uint64_t stream) : state_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

struct McResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t paths = 0;
  std::uint64_t seed = 0;
};

// continuous: GBM paths. lattice: per-step returns drawn from the midpoint lattice pmf
// (renormalized), i.e. the discretized model that exact_lattice_price sums over.
enum class SamplingModel { continuous, lattice };

struct McSettings {
  SamplingModel model = SamplingModel::continuous;
  GridSpec grid;  // used only for SamplingModel::lattice
  std::int64_t block = 1024;
};

namespace detail {

struct LatticeSampler {
  StepLattice step;
  std::vector<double> cdf;

  explicit LatticeSampler(StepLattice s) : step(std::move(s)) {
    KahanSum acc;
    for (double p : step.pmf) {
      acc.add(p);
      cdf.push_back(acc.value());
    }
    for (double& c : cdf) c /= acc.value();
  }
  [[nodiscard]] const Eigen::VectorXd& draw(double u) const {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    return step.points[i];
  }
};

}  // namespace detail

// Mean of payoff(prices) over M paths. payoff receives a T x d price matrix.
// Block sums are reduced in block order, so results do not depend on thread count.
template <class Payoff>
[[nodiscard]] McResult mc_expectation(const GBMParams& p, std::int64_t M, std::uint64_t seed, Payoff&& payoff,
                                      const McSettings& settings = {}) {
  require(M >= 2, "mc requires M >= 2");
  const auto cov = build_covariance(p);
  const Eigen::MatrixXd L = cholesky_factor(cov);
  const Eigen::VectorXd mu = drift(p);
  std::unique_ptr<detail::LatticeSampler> sampler;
  if (settings.model == SamplingModel::lattice) sampler = std::make_unique<detail::LatticeSampler>(step_lattice(settings.grid, p));

  const std::int64_t nblocks = ceil_div(M, settings.block);
  std::vector<double> s1(nblocks), s2(nblocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    KahanSum a1, a2;
    ReturnPath path(p.T, p.d);
    Eigen::VectorXd z(p.d);
    const std::int64_t end = std::min(M, (b + 1) * settings.block);
    for (std::int64_t i = b * settings.block; i < end; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      if (sampler) {
        for (int t = 0; t < p.T; ++t) path.row(t) = sampler->draw(rng.uniform()).transpose();
      } else {
        std::normal_distribution<double> nd;
        for (int t = 0; t < p.T; ++t) {
          for (int j = 0; j < p.d; ++j) z[j] = nd(rng);
          path.row(t) = (mu + L * z).transpose();
        }
      }
      const double f = payoff(returns_to_prices(p.s0, path));
      a1.add(f);
      a2.add(f * f);
    }
    s1[b] = a1.value();
    s2[b] = a2.value();
  }
  KahanSum t1, t2;
  for (std::int64_t b = 0; b < nblocks; ++b) {
    t1.add(s1[b]);
    t2.add(s2[b]);
  }
  const double Md = static_cast<double>(M);
  const double mean = t1.value() / Md;
  const double var = std::max(0.0, (t2.value() - Md * mean * mean) / (Md - 1.0));
  return {mean, std::sqrt(var / Md), M, seed};
}

[[nodiscard]] inline McResult mc_price(const GBMParams& p, const ContractSpec& c, std::int64_t M, std::uint64_t seed,
                                       const McSettings& settings = {}) {
  return mc_expectation(
      p, M, seed, [&](const PricePath& prices) { return discounted_payoff(c, prices, p.s0, p.dt, p.r); }, settings);
}

struct LatticeResult {
  double price = 0.0;                   // sum_w p(w) f(w)
  double normalized_expectation = 0.0;  // sum_w p(w) f~(w), what amplitude estimation targets
  double rescaled = 0.0;                // f_delta * normalized_expectation + f_min
  double mass = 0.0;                    // sum_w p(w)
  std::int64_t lattice_size = 0;
};

constexpr int kMaxLatticeBits = 26;

// Enumerates all T-step lattice paths in mixed-radix order (step 0 fastest).
// visit(path, probability) is called once per path.
template <class Visit>
void enumerate_lattice_paths(const GBMParams& p, const GridSpec& g, Visit&& visit) {
  validate(g);
  require(g.dims() == p.d, "grid dimension must equal asset count");
  const std::int64_t bits = static_cast<std::int64_t>(g.n) * p.d * p.T;
  if (bits > kMaxLatticeBits)
    throw Infeasible("lattice has 2^" + std::to_string(bits) + " paths (limit 2^" + std::to_string(kMaxLatticeBits) +
                     "); reduce n, d or T");
  const StepLattice step = step_lattice(g, p);
  const auto S = static_cast<std::int64_t>(step.pmf.size());
  ReturnPath path(p.T, p.d);
  const std::int64_t total = std::int64_t{1} << bits;
  for (std::int64_t k = 0; k < total; ++k) {
    std::int64_t rem = k;
    double prob = 1.0;
    for (int t = 0; t < p.T; ++t) {
      const std::int64_t i = rem % S;
      rem /= S;
      path.row(t) = step.points[i].transpose();
      prob *= step.pmf[i];
    }
    visit(static_cast<const ReturnPath&>(path), prob);
  }
}

template <class Payoff>
[[nodiscard]] LatticeResult exact_lattice_expectation(const GBMParams& p, const GridSpec& g, Payoff&& payoff,
                                                      const PayoffBounds& bounds) {
  KahanSum price, norm, mass;
  std::int64_t count = 0;
  enumerate_lattice_paths(p, g, [&](const ReturnPath& path, double prob) {
    const double f = payoff(returns_to_prices(p.s0, path));
    price.add(prob * f);
    norm.add(prob * normalize(f, bounds));
    mass.add(prob);
    ++count;
  });
  LatticeResult r;
  r.price = price.value();
  r.normalized_expectation = norm.value();
  r.rescaled = denormalize(r.normalized_expectation, bounds);
  r.mass = mass.value();
  r.lattice_size = count;
  return r;
}

[[nodiscard]] inline LatticeResult exact_lattice_price(const GBMParams& p, const ContractSpec& c, const GridSpec& g) {
  const auto bounds = payoff_bounds(c, p.r);
  return exact_lattice_expectation(
      p, g, [&](const PricePath& prices) { return discounted_payoff(c, prices, p.s0, p.dt, p.r); }, bounds);
}

// dT independent standard-normal lattices on [-w, w] followed by R = mu + L z per step.
struct ReparamDistribution {
  std::vector<double> z;    // midpoints
  std::vector<double> pmf;  // g(z) dz, shared by all dT factors
  Eigen::VectorXd mu;
  Eigen::MatrixXd L;

  [[nodiscard]] Eigen::VectorXd transform(const Eigen::VectorXd& zvec) const { return mu + L * zvec; }
  [[nodiscard]] double mass_per_factor() const {
    KahanSum s;
    for (double v : pmf) s.add(v);
    return s.value();
  }
};

[[nodiscard]] inline ReparamDistribution reparam_distribution(int n, double w, const GBMParams& p) {
  const auto lat = lattice(standard_grid(n, w), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  return {lat.midpoints[0], lat.pmf[0], drift(p), cholesky_factor(build_covariance(p))};
}

[[nodiscard]] inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

[[nodiscard]] inline double black_scholes_call(double s0, double K, double r, double sigma, double t) {
  const double sq = sigma * std::sqrt(t);
  const double d1 = (std::log(s0 / K) + (r + 0.5 * sigma * sigma) * t) / sq;
  return s0 * norm_cdf(d1) - K * std::exp(-r * t) * norm_cdf(d1 - sq);
}

}  // namespace qdp
