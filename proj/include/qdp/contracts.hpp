#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "qdp/common.hpp"

namespace qdp {

struct Cashflow {
  double time = 0.0;
  double amount = 0.0;
};

struct BinaryLeg {
  double K = 1.0;  // strike return
  double t = 1.0;  // payment time, years
  double p = 0.0;  // payoff, currency
};

// How per-asset cumulative returns reduce to one return for baskets.
enum class BasketRule { worst_of, best_of };

struct AutocallableSpec {
  std::vector<BinaryLeg> binaries;  // sorted by t
  double K_put = 1.0;
  double b = 0.7;  // knock-in barrier return
  double k = 0.0;  // put notional; 0 disables the put
  std::vector<double> barrier_dates;
  BasketRule basket = BasketRule::worst_of;

  [[nodiscard]] double maturity() const {
    double m = binaries.empty() ? 0.0 : binaries.back().t;
    for (double t : barrier_dates) m = std::max(m, t);
    return m;
  }
};

struct TARFSpec {
  double F = 20.0;
  double K_upper = 20.0;
  double K_lower = 15.0;
  double b = 30.0;  // knock-out price
  double alpha = 2.0;
  double C = 5.0;
  std::vector<double> payment_times;
};

using ContractSpec = std::variant<AutocallableSpec, TARFSpec>;

inline void validate(const AutocallableSpec& s) {
  require(!s.binaries.empty(), "autocallable needs at least one binary leg");
  for (std::size_t i = 0; i < s.binaries.size(); ++i) {
    require(s.binaries[i].p >= 0.0, "binary payoffs must be nonnegative");
    require(s.binaries[i].K > 0.0, "binary strikes must be positive");
    if (i > 0) require(s.binaries[i].t > s.binaries[i - 1].t, "binary times must be strictly increasing");
  }
  require(s.b > 0.0 && s.b <= s.K_put, "require 0 < b <= K_put");
  require(s.k >= 0.0, "put notional must be nonnegative");
  for (std::size_t i = 1; i < s.barrier_dates.size(); ++i)
    require(s.barrier_dates[i] > s.barrier_dates[i - 1], "barrier dates must be strictly increasing");
}

inline void validate(const TARFSpec& s) {
  require(s.K_lower <= s.F && s.F <= s.K_upper && s.K_upper < s.b, "require K_lower <= F <= K_upper < b");
  require(s.C > 0.0, "cap C must be positive");
  require(s.alpha > 0.0, "alpha must be positive");
  require(!s.payment_times.empty(), "TARF needs payment times");
  for (std::size_t i = 1; i < s.payment_times.size(); ++i)
    require(s.payment_times[i] > s.payment_times[i - 1], "payment times must be strictly increasing");
}

// Cumulative returns observed at the given times.
struct CumulativePath {
  std::vector<double> times;
  std::vector<double> values;

  [[nodiscard]] double at(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - t) < 1e-9) return values.at(i);
    throw InvalidInput("path has no observation at t=" + std::to_string(t));
  }
};

// Binaries pay on R >= K; knock-in on R < b at any barrier date.
[[nodiscard]] inline std::vector<Cashflow> autocall_payoff(const CumulativePath& path, const AutocallableSpec& s) {
  require(path.times.size() == path.values.size(), "path times/values length mismatch");
  for (const auto& leg : s.binaries)
    if (path.at(leg.t) >= leg.K) return {{leg.t, leg.p}};
  if (s.k == 0.0) return {};
  bool knocked_in = false;
  for (double t : s.barrier_dates) knocked_in = knocked_in || path.at(t) < s.b;
  const double tm = s.maturity();
  const double rT = path.at(tm);
  if (knocked_in && rT < s.K_put) return {{tm, s.k * (rT - s.K_put)}};
  return {};
}

// Payoffs at payment dates; the barrier check precedes the payoff on each date.
[[nodiscard]] inline std::vector<Cashflow> tarf_payoff(const std::vector<double>& prices, const TARFSpec& s) {
  require(prices.size() == s.payment_times.size(), "price path length must equal payment count");
  std::vector<Cashflow> out;
  double total = 0.0;
  for (std::size_t t = 0; t < prices.size(); ++t) {
    const double S = prices[t];
    if (S >= s.b) break;
    double f = 0.0;
    if (S > s.K_upper)
      f = S - s.F;
    else if (S < s.K_lower)
      f = s.alpha * (S - s.F);
    if (total + f >= s.C) {
      out.push_back({s.payment_times[t], s.C - total});
      break;
    }
    total += f;
    if (f != 0.0) out.push_back({s.payment_times[t], f});
  }
  return out;
}

[[nodiscard]] inline double discount_and_sum(const std::vector<Cashflow>& cfs, double r) {
  KahanSum acc;
  for (const auto& c : cfs) {
    require(c.time >= 0.0, "cashflow times must be nonnegative");
    acc.add(std::exp(-r * c.time) * c.amount);
  }
  return acc.value();
}

struct PayoffBounds {
  double f_min = 0.0;
  double f_max = 1.0;
  [[nodiscard]] double f_delta() const { return f_max - f_min; }
};

[[nodiscard]] inline PayoffBounds payoff_bounds(const AutocallableSpec& s, double r) {
  validate(s);
  PayoffBounds b;
  b.f_max = 0.0;
  for (const auto& leg : s.binaries) b.f_max = std::max(b.f_max, std::exp(-r * leg.t) * leg.p);
  b.f_min = -std::exp(-r * s.maturity()) * s.k * s.K_put;
  if (!(b.f_max > b.f_min)) b.f_max = b.f_min + 1.0;  // degenerate all-zero contract
  return b;
}

// Gains capped at C with at most (b - F) per date; losses floored at alpha*T*F per date.
[[nodiscard]] inline PayoffBounds payoff_bounds(const TARFSpec& s, double r) {
  validate(s);
  const auto T = static_cast<double>(s.payment_times.size());
  PayoffBounds b;
  KahanSum lo;
  for (double t : s.payment_times) lo.add(std::exp(-r * t) * s.alpha * T * s.F);
  b.f_min = -lo.value();
  KahanSum hi;
  double remaining = s.C;
  for (std::size_t j = 0; j < s.payment_times.size() && remaining > 0.0; ++j) {
    const double gain = std::min(s.b - s.F, remaining);
    hi.add(std::exp(-r * s.payment_times[j]) * gain);
    remaining -= gain;
  }
  b.f_max = hi.value();
  return b;
}

[[nodiscard]] inline PayoffBounds payoff_bounds(const ContractSpec& c, double r) {
  return std::visit([r](const auto& s) { return payoff_bounds(s, r); }, c);
}

[[nodiscard]] inline double normalize(double f, const PayoffBounds& b) {
  const double tol = 1e-12 * std::max(1.0, b.f_delta());
  if (f < b.f_min - tol || f > b.f_max + tol)
    throw InvalidInput("payoff " + std::to_string(f) + " outside [f_min, f_max]; bounds are wrong");
  return std::clamp((f - b.f_min) / b.f_delta(), 0.0, 1.0);
}

[[nodiscard]] inline double denormalize(double ft, const PayoffBounds& b) { return b.f_delta() * ft + b.f_min; }

// Discounted payoff of a model path. prices is T x d at times (t+1) dt.
[[nodiscard]] inline double discounted_payoff(const ContractSpec& c, const Eigen::MatrixXd& prices,
                                              const Eigen::VectorXd& s0, double dt, double r) {
  const auto steps = prices.rows();
  auto step_of = [&](double t) {
    const double k = t / dt;
    const auto i = static_cast<Eigen::Index>(std::llround(k));
    if (std::abs(k - static_cast<double>(i)) > 1e-6 || i < 1 || i > steps)
      throw InvalidInput("observation time " + std::to_string(t) + " is not on the model grid");
    return i - 1;
  };
  if (const auto* ac = std::get_if<AutocallableSpec>(&c)) {
    CumulativePath cp;
    auto add = [&](double t) {
      for (double u : cp.times)
        if (std::abs(u - t) < 1e-9) return;
      const auto i = step_of(t);
      double v = prices(i, 0) / s0[0];
      for (Eigen::Index j = 1; j < prices.cols(); ++j) {
        const double rj = prices(i, j) / s0[j];
        v = ac->basket == BasketRule::worst_of ? std::min(v, rj) : std::max(v, rj);
      }
      cp.times.push_back(t);
      cp.values.push_back(v);
    };
    for (const auto& leg : ac->binaries) add(leg.t);
    for (double t : ac->barrier_dates) add(t);
    add(ac->maturity());
    return discount_and_sum(autocall_payoff(cp, *ac), r);
  }
  const auto& tf = std::get<TARFSpec>(c);
  std::vector<double> s;
  s.reserve(tf.payment_times.size());
  for (double t : tf.payment_times) s.push_back(prices(step_of(t), 0));
  return discount_and_sum(tarf_payoff(s, tf), r);
}

}  // namespace qdp
