#pragma once

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

#include "qdp/common.hpp"
#include "qdp/contracts.hpp"

namespace qdp {

// Worst-case oracle calls: 1.4/eps * ln(2/alpha * log2(pi/(4 eps))).
[[nodiscard]] inline double oracle_call_bound(double eps, double alpha) {
  require(eps > 0.0 && eps < 1.0, "oracle_call_bound: eps must lie in (0,1)");
  require(alpha > 0.0 && alpha < 1.0, "oracle_call_bound: alpha must lie in (0,1)");
  const double arg = 2.0 / alpha * std::log2(std::numbers::pi / (4.0 * eps));
  require(arg > 1.0, "oracle_call_bound: eps too large for the bound's logarithm");
  return 1.4 / eps * std::log(arg);
}

// Bernoulli model of A and Q = A S0 A^dag S_psi0 acting on a marked amplitude a.
class GroverOracleSim {
 public:
  explicit GroverOracleSim(double a, double noise = 0.0) : a_(a), theta_(std::asin(std::sqrt(a))), noise_(noise) {
    require(a >= 0.0 && a <= 1.0, "amplitude must lie in [0,1]");
    require(noise >= 0.0 && noise <= 1.0, "noise must lie in [0,1]");
  }

  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double theta() const { return theta_; }
  [[nodiscard]] double p_one(std::int64_t k) const {
    const double s = std::sin(static_cast<double>(2 * k + 1) * theta_);
    return (1.0 - noise_) * s * s + 0.5 * noise_;
  }

  // Runs Q^k A `shots` times; returns the number of 1 outcomes.
  template <class Rng>
  std::int64_t sample(std::int64_t k, std::int64_t shots, Rng& rng) {
    call_counter += k * shots;
    base_preparations += shots;
    std::binomial_distribution<std::int64_t> bin(shots, std::clamp(p_one(k), 0.0, 1.0));
    return bin(rng);
  }

  std::int64_t call_counter = 0;       // applications of Q
  std::int64_t base_preparations = 0;  // applications of A outside Q, one per shot

 private:
  double a_;
  double theta_;
  double noise_;
};

struct IqaeSettings {
  std::int64_t shots = 3;
  double min_ratio = 2.0;
};

struct IqaeResult {
  double a_hat = 0.0;
  std::pair<double, double> interval{0.0, 1.0};
  std::int64_t oracle_calls = 0;  // applications of Q
  std::int64_t shots = 0;
  int rounds = 0;
};

namespace detail {

inline std::pair<double, double> clopper_pearson(std::int64_t ones, std::int64_t n, double alpha) {
  using boost::math::beta_distribution;
  using boost::math::quantile;
  const double lo = ones == 0 ? 0.0
                              : quantile(beta_distribution<double>(static_cast<double>(ones),
                                                                   static_cast<double>(n - ones + 1)),
                                         alpha / 2.0);
  const double hi = ones == n ? 1.0
                              : quantile(beta_distribution<double>(static_cast<double>(ones + 1),
                                                                   static_cast<double>(n - ones)),
                                         1.0 - alpha / 2.0);
  return {lo, hi};
}

// Theta in units of full turns; interval [tl, tu] inside [0, 1/4].
inline std::pair<std::int64_t, bool> find_next_k(std::int64_t k, bool up, double tl, double tu, double min_ratio) {
  const auto old_scaling = static_cast<double>(4 * k + 2);
  auto scaling = static_cast<std::int64_t>(1.0 / (2.0 * (tu - tl)));
  scaling -= ((scaling - 2) % 4 + 4) % 4;
  while (static_cast<double>(scaling) >= min_ratio * old_scaling) {
    const double sl = static_cast<double>(scaling) * tl;
    const double su = static_cast<double>(scaling) * tu;
    const double fmin = sl - std::floor(sl);
    const double fmax = su - std::floor(su);
    if (fmin <= fmax && fmax <= 0.5) return {(scaling - 2) / 4, true};
    if (fmax >= 0.5 && fmin >= 0.5 && fmax >= fmin) return {(scaling - 2) / 4, false};
    scaling -= 4;
  }
  return {k, up};
}

}  // namespace detail

// Iterative amplitude estimation with Clopper-Pearson intervals at level alpha/T_max.
// Terminates once the angle interval is at most 2 eps wide, so the amplitude interval is too.
[[nodiscard]] inline IqaeResult iqae_estimate(GroverOracleSim& oracle, double eps, double alpha, std::uint64_t seed,
                                              const IqaeSettings& s = {}) {
  require(eps > 0.0 && eps < 0.5, "iqae: eps must lie in (0, 0.5)");
  require(alpha > 0.0 && alpha < 1.0, "iqae: alpha must lie in (0,1)");
  std::mt19937_64 rng(seed);
  const auto calls0 = oracle.call_counter;
  const auto prep0 = oracle.base_preparations;
  const double two_pi = 2.0 * std::numbers::pi;
  const int t_max = std::max<int>(1, static_cast<int>(std::ceil(std::log2(std::numbers::pi / (8.0 * eps)))));
  const double alpha_round = alpha / t_max;

  double tl = 0.0, tu = 0.25;  // full turns
  std::int64_t k = 0, prev_k = -1;
  bool up = true;
  std::int64_t ones_k = 0, shots_k = 0;
  bool all_zero = true, all_one = true;
  IqaeResult res;
  while ((tu - tl) * two_pi > 2.0 * eps && res.rounds < 10000) {
    ++res.rounds;
    std::tie(k, up) = detail::find_next_k(k, up, tl, tu, s.min_ratio);
    const std::int64_t ones = oracle.sample(k, s.shots, rng);
    all_zero = all_zero && ones == 0;
    all_one = all_one && ones == s.shots;
    if (k == prev_k) {
      ones_k += ones;
      shots_k += s.shots;
    } else {
      ones_k = ones;
      shots_k = s.shots;
    }
    prev_k = k;
    const auto [amin, amax] = detail::clopper_pearson(ones_k, shots_k, alpha_round);
    double th_min, th_max;
    if (up) {
      th_min = std::acos(1.0 - 2.0 * amin) / two_pi;
      th_max = std::acos(1.0 - 2.0 * amax) / two_pi;
    } else {
      th_min = 1.0 - std::acos(1.0 - 2.0 * amax) / two_pi;
      th_max = 1.0 - std::acos(1.0 - 2.0 * amin) / two_pi;
    }
    const auto K = static_cast<double>(4 * k + 2);
    const double ntu = (std::floor(K * tu) + th_max) / K;
    const double ntl = (std::floor(K * tl) + th_min) / K;
    tl = std::max(tl, ntl);
    tu = std::min(tu, ntu);
  }
  const double al = std::pow(std::sin(two_pi * tl), 2);
  const double au = std::pow(std::sin(two_pi * tu), 2);
  res.interval = {std::min(al, au), std::max(al, au)};
  res.a_hat = all_zero ? 0.0 : all_one ? 1.0 : 0.5 * (res.interval.first + res.interval.second);
  res.oracle_calls = oracle.call_counter - calls0;
  res.shots = oracle.base_preparations - prep0;
  return res;
}

// Bernoulli samples needed for a normal-approximation half-width eps at confidence 1-alpha (worst case a=1/2).
[[nodiscard]] inline std::int64_t classical_sample_count(double eps, double alpha) {
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
  return static_cast<std::int64_t>(std::ceil(z * z / (4.0 * eps * eps)));
}

struct ClassicalResult {
  double a_hat = 0.0;
  std::int64_t samples = 0;
};

[[nodiscard]] inline ClassicalResult classical_estimate(double a, double eps, double alpha, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::int64_t n = classical_sample_count(eps, alpha);
  std::binomial_distribution<std::int64_t> bin(n, a);
  return {static_cast<double>(bin(rng)) / static_cast<double>(n), n};
}

[[nodiscard]] inline double rescale_estimate(double a_hat, const PayoffBounds& b) { return denormalize(a_hat, b); }

// Riemann variant: P_max^T (f_delta a + f_min).
[[nodiscard]] inline double rescale_estimate_riemann(double a_hat, const PayoffBounds& b, double p_max, int T) {
  return std::pow(p_max, T) * denormalize(a_hat, b);
}

}  // namespace qdp
