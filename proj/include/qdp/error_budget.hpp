#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "qdp/common.hpp"
#include "qdp/qarith.hpp"

namespace qdp {

// Components are payoff-normalized; eps_total is in currency.
struct ErrorBudget {
  double eps_trunc = 0.0;
  double eps_disc = 0.0;
  double eps_arith = 0.0;
  double eps_amp = 0.0;
  double scale = 1.0;  // P_max^T f_delta (Riemann) or f_delta (reparam)
  double eps_total = 0.0;

  [[nodiscard]] double components() const { return eps_trunc + eps_disc + eps_arith + eps_amp; }
};

// Tail mass outside w standard deviations over dT one-dimensional factors.
[[nodiscard]] inline double truncation_error(int d, int T, double w) {
  require(d >= 1 && T >= 1 && w > 0.0, "truncation_error needs d, T >= 1 and w > 0");
  return 2.0 * d * T * std::exp(-0.5 * w * w);
}

// Midpoint error of one cell of side l in `dims` dimensions, with beta bounding the
// curvature summed over coordinates.
[[nodiscard]] inline double midpoint_cell_error(double beta, double l, int dims) {
  return beta * std::pow(l, dims + 2) / 24.0;
}

// beta (2 w sigma_max)^{dT+2} / (24 * 2^{2n}), evaluated in log space.
[[nodiscard]] inline double discretization_error(double beta, double w, double sigma_max, int d, int T, int n) {
  require(beta >= 0.0 && w > 0.0 && sigma_max > 0.0 && n >= 1, "discretization_error domain");
  if (beta == 0.0) return 0.0;
  const double dT = static_cast<double>(d) * T;
  return std::exp(std::log(beta) + (dT + 2.0) * std::log(2.0 * w * sigma_max) - std::log(24.0) -
                  2.0 * n * std::numbers::ln2);
}

// Qubits per register so discretization_error <= eps_disc (at least 1).
[[nodiscard]] inline int qubits_per_register_for_target(double eps_disc, double beta, double w, double sigma_max, int d,
                                                        int T) {
  require(eps_disc > 0.0 && beta > 0.0, "qubits_for_target needs eps_disc, beta > 0");
  const double dT = static_cast<double>(d) * T;
  const double x = 0.5 * (std::log2(beta / 24.0) - std::log2(eps_disc) + (dT + 2.0) * std::log2(2.0 * w * sigma_max));
  return std::max(1, static_cast<int>(std::ceil(x - 1e-12)));
}

// Total qubits n d T.
[[nodiscard]] inline std::int64_t qubits_for_target(double eps_disc, double beta, double w, double sigma_max, int d,
                                                    int T) {
  return static_cast<std::int64_t>(qubits_per_register_for_target(eps_disc, beta, w, sigma_max, d, T)) * d * T;
}

// (2w/sqrt(2 pi))^d
[[nodiscard]] inline double riemann_pmax(int d, double w) {
  return std::pow(2.0 * w / std::sqrt(2.0 * std::numbers::pi), d);
}

// (2w)^d prod sigma_j / ((2 pi)^{d/2} det(Sigma)^{1/2}), sigma_j^2 = Sigma_jj.
[[nodiscard]] inline double riemann_pmax(double w, const Eigen::MatrixXd& Sigma) {
  const auto d = static_cast<int>(Sigma.rows());
  double prod = 1.0;
  for (int j = 0; j < d; ++j) prod *= std::sqrt(Sigma(j, j));
  const double det = Sigma.determinant();
  require(det > 0.0, "riemann_pmax needs a positive-definite Sigma");
  return std::pow(2.0 * w, d) * prod / (std::pow(2.0 * std::numbers::pi, 0.5 * d) * std::sqrt(det));
}

// Largest w with P_max <= 1 for one dimension: sqrt(2 pi)/2.
[[nodiscard]] inline double riemann_unit_width() { return std::sqrt(2.0 * std::numbers::pi) / 2.0; }

[[nodiscard]] inline double riemann_sum_error(const FixedPointFormat& f, double w, double sigma_max, int d, int T) {
  validate(f);
  const double res = f.resolution();
  return ((2.0 * w * sigma_max + f.n) * res + res * res) * static_cast<double>(d + binom2(d)) * T;
}

struct DensityComponents {
  double eps_sin = 0.0;
  double eps_arcsin = 0.0;
  double eps_sq = 0.0;
  double eps_exp = 0.0;
  double eps_sum = 0.0;
};

[[nodiscard]] inline double riemann_density_error(const DensityComponents& c) {
  const double inner = 0.5 - (c.eps_sq + std::sqrt(c.eps_exp + c.eps_sum));
  require(inner >= -1.0, "riemann_density_error: components too large for the arcsine bound");
  return c.eps_sin + c.eps_arcsin - std::asin(inner) + std::asin(0.5);
}

[[nodiscard]] inline double riemann_arith_error(double eps_f, double eps_dens, double w, double sigma_max, int d,
                                                int T) {
  return eps_f / std::pow(2.0 * w * sigma_max, static_cast<double>(d) * T) + eps_dens;
}

[[nodiscard]] inline double reparam_arith_error(double w, int d, int T, double eps_dens, double eps_f) {
  return 2.0 * w * d * T * eps_dens + eps_f;
}

// ---- propagation through fixed-point primitives ----

[[nodiscard]] inline double eps_add(const FixedPointFormat& f) { return f.resolution(); }

[[nodiscard]] inline double eps_mul_primitive(const FixedPointFormat& f) { return f.n * f.resolution(); }

// b bounds |X| and |Y|.
[[nodiscard]] inline double eps_mul(double b, double eps_x, double eps_y, const FixedPointFormat& f) {
  return b * (eps_x + eps_y) + eps_x * eps_y + eps_mul_primitive(f);
}

// exp(-x) on x >= 0, input error eps_in.
[[nodiscard]] inline double eps_exp(double eps_in, double eps_exp0) { return eps_exp0 + eps_in; }

[[nodiscard]] inline double eps_sq(const FixedPointFormat& f) { return std::pow(2.0, -0.5 * (f.n - f.p)); }

// Nonnegative input error eps_in.
[[nodiscard]] inline double eps_sqrt(double eps_in, const FixedPointFormat& f) {
  return eps_sq(f) + std::sqrt(eps_in);
}

// arcsin on [0, 0.5].
[[nodiscard]] inline double eps_arcsin(double eps_in, double eps_arcsin0) {
  return std::abs(std::asin(0.5) - std::asin(0.5 - eps_in)) + eps_arcsin0;
}

// sin on [0, pi/2].
[[nodiscard]] inline double eps_sin(double eps_in, double eps_sin0) { return eps_in + eps_sin0; }

// ---- totals ----

struct ErrorComponents {
  double eps_trunc = 0.0;
  double eps_disc = 0.0;
  double eps_arith = 0.0;
  double eps_amp = 0.0;
};

[[nodiscard]] inline ErrorBudget riemann_total(const ErrorComponents& c, double p_max, int T, double f_delta) {
  ErrorBudget b{c.eps_trunc, c.eps_disc, c.eps_arith, c.eps_amp, std::pow(p_max, T) * f_delta, 0.0};
  b.eps_total = b.scale * b.components();
  return b;
}

[[nodiscard]] inline ErrorBudget reparam_total(const ErrorComponents& c, double f_delta) {
  ErrorBudget b{c.eps_trunc, c.eps_disc, c.eps_arith, c.eps_amp, f_delta, 0.0};
  b.eps_total = b.scale * b.components();
  return b;
}

}  // namespace qdp
