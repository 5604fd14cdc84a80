#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "qdp/common.hpp"

namespace qdp {

// Model constant: T gates per Toffoli.
constexpr std::int64_t kTPerToffoli = 7;

struct FixedPointFormat {
  int n = 34;  // total bits
  int p = 2;   // integer bits
  [[nodiscard]] double resolution() const { return std::ldexp(1.0, -(n - p)); }
};

inline void validate(const FixedPointFormat& f) {
  require(f.p >= 1 && f.p < f.n, "fixed-point format requires 1 <= p < n");
}

struct ResourceCount {
  std::int64_t toffoli_count = 0;
  std::int64_t t_count = 0;
  std::int64_t t_depth = 0;
  std::int64_t logical_qubits = 0;

  friend bool operator==(const ResourceCount&, const ResourceCount&) = default;
};

// Toffoli-only gadget; T-count from the per-Toffoli constant.
[[nodiscard]] inline ResourceCount toffoli_gadget(std::int64_t toffolis, std::int64_t depth, std::int64_t qubits) {
  return {toffolis, kTPerToffoli * toffolis, depth, qubits};
}

// One after the other: counts, depth and qubits add (no register reuse).
[[nodiscard]] inline ResourceCount serial(const ResourceCount& a, const ResourceCount& b) {
  return {a.toffoli_count + b.toffoli_count, a.t_count + b.t_count, a.t_depth + b.t_depth,
          a.logical_qubits + b.logical_qubits};
}

// Side by side: depth is the max, everything else adds.
[[nodiscard]] inline ResourceCount parallel(const ResourceCount& a, const ResourceCount& b) {
  return {a.toffoli_count + b.toffoli_count, a.t_count + b.t_count, std::max(a.t_depth, b.t_depth),
          a.logical_qubits + b.logical_qubits};
}

[[nodiscard]] inline ResourceCount repeat_serial(const ResourceCount& a, std::int64_t k) {
  return {a.toffoli_count * k, a.t_count * k, a.t_depth * k, a.logical_qubits * k};
}

[[nodiscard]] inline ResourceCount repeat_parallel(const ResourceCount& a, std::int64_t k) {
  return {a.toffoli_count * k, a.t_count * k, k > 0 ? a.t_depth : 0, a.logical_qubits * k};
}

namespace detail {
inline void need(int n, int min_n, const char* what) {
  if (n < min_n) throw InvalidInput(std::string(what) + ": n must be >= " + std::to_string(min_n));
}
}  // namespace detail

// ---- addition / subtraction ----

[[nodiscard]] inline std::int64_t tf_add(int n) {
  detail::need(n, 4, "add");
  return 10LL * n - 3 * popcount(n) - 3 * popcount(n - 1) - 3 * floor_log2(n) - 3 * floor_log2(n - 1) - 7;
}

[[nodiscard]] inline std::int64_t t_add(int n) {
  detail::need(n, 4, "add");
  return floor_log2(n) + floor_log2(n - 1) + floor_log2_ratio(n, 3) + floor_log2_ratio(n - 1, 3) + 8;
}

// Output register of n qubits.
[[nodiscard]] inline ResourceCount add_resources(const FixedPointFormat& f) {
  validate(f);
  return toffoli_gadget(tf_add(f.n), t_add(f.n), f.n);
}

// Two sets of n parallel controlled swaps (3 Toffolis each, serial): +6 depth, +n ancillas.
[[nodiscard]] inline ResourceCount controlled_add_resources(const FixedPointFormat& f) {
  auto r = add_resources(f);
  return serial(r, toffoli_gadget(6LL * f.n, 6, f.n));
}

[[nodiscard]] inline ResourceCount sub_resources(const FixedPointFormat& f) { return add_resources(f); }

// ---- multiplication ----

[[nodiscard]] inline std::int64_t tf_mul(int n, int p) {
  // 3/2 n^2 + 3np + 3/2 n - 3p^2 + 3p; n(n+1) is even so the sum is integral.
  return 3LL * n * (n + 1) / 2 + 3LL * n * p - 3LL * p * p + 3LL * p;
}

[[nodiscard]] inline std::int64_t t_mul(int n, int z) {
  require(z >= 1 && z <= n, "multiplication split z must lie in [1, n]");
  return ceil_div(n, z) * (t_add(n) + 6) + ceil_log2(z) * t_add(n);
}

// Product register n, partial-sum register n, plus n(z-1) for the split.
[[nodiscard]] inline ResourceCount mul_resources(const FixedPointFormat& f, int z = 1) {
  validate(f);
  detail::need(f.n, 4, "mul");
  return toffoli_gadget(tf_mul(f.n, f.p), t_mul(f.n, z), 2LL * f.n + static_cast<std::int64_t>(f.n) * (z - 1));
}

// Multiplication by a classical constant: no second operand register, so n z qubits.
[[nodiscard]] inline ResourceCount const_mul_resources(const FixedPointFormat& f, int z = 1) {
  validate(f);
  detail::need(f.n, 4, "mul");
  return toffoli_gadget(tf_mul(f.n, f.p), t_mul(f.n, z), static_cast<std::int64_t>(f.n) * z);
}

// ---- square root ----

[[nodiscard]] inline ResourceCount sqrt_resources(const FixedPointFormat& f) {
  validate(f);
  detail::need(f.n, 2, "sqrt");
  const std::int64_t n = f.n;
  return toffoli_gadget(ceil_div(n * n, 2) + 3 * n - 4, 5 * n + 3, 2 * n + 1);
}

// ---- comparisons and logic ----

[[nodiscard]] inline std::int64_t t_cmp(int n) {
  detail::need(n, 2, "comparator");
  return 2 * floor_log2(n - 1) + 5;
}

// Toffoli count is a model choice: carry-lookahead carry computation, computed then uncomputed.
[[nodiscard]] inline std::int64_t tf_cmp(int n) {
  detail::need(n, 2, "comparator");
  return std::max<std::int64_t>(1, 2 * (4LL * n - 3 * popcount(n) - 3 * floor_log2(n) - 1) - 1);
}

// One output qubit plus n-1 carry ancillas live during the comparison.
[[nodiscard]] inline ResourceCount comparator_resources(const FixedPointFormat& f) {
  validate(f);
  return toffoli_gadget(tf_cmp(f.n), t_cmp(f.n), f.n);
}

// Two-input AND/OR into a fresh qubit.
[[nodiscard]] inline ResourceCount logic_gate_resources() { return toffoli_gadget(1, 1, 1); }

// Balanced tree over m inputs.
[[nodiscard]] inline ResourceCount logic_tree_resources(std::int64_t m) {
  if (m <= 1) return {};
  return toffoli_gadget(m - 1, ceil_log2(m), m - 1);
}

// ---- piecewise polynomial evaluation (exp) ----

[[nodiscard]] inline std::int64_t q_pp(int n, int k, int M) {
  return static_cast<std::int64_t>(n) * (k + 1) + ceil_log2(M) + 1;
}

[[nodiscard]] inline std::int64_t t_pp(int n, int k, int M, int z) {
  return static_cast<std::int64_t>(k) * (t_mul(n, z) + t_add(n)) + static_cast<std::int64_t>(M) * t_cmp(n);
}

// TF_exp with the formula's stray d read as the polynomial degree k.
[[nodiscard]] inline std::int64_t tf_exp(int n, int p, int k, int M) {
  const std::int64_t N = n, P = p, K = k, MM = M;
  const std::int64_t poly = K * (3 * N * (N + 1) / 2 + 3 * N * P + 2 * N - 3 * P * P + 3 * P - 1);
  const std::int64_t sel = 2 * MM * K * (4 * ceil_log2(M) - 8) + 4 * MM * N;
  return std::max<std::int64_t>(0, poly + sel);
}

struct PolyParams {
  int k = 3;   // degree
  int M = 32;  // subintervals
  int z = 2;   // multiplication split
};

[[nodiscard]] inline ResourceCount exp_resources(const FixedPointFormat& f, const PolyParams& pp) {
  validate(f);
  require(pp.k >= 0 && pp.M >= 1, "polynomial needs k >= 0 and M >= 1");
  return toffoli_gadget(tf_exp(f.n, f.p, pp.k, pp.M), t_pp(f.n, pp.k, pp.M, pp.z), q_pp(f.n, pp.k, pp.M));
}

// ---- arcsin(sqrt(x)) ----

[[nodiscard]] inline std::int64_t tf_arcsq(int n, int p, int k, int M) {
  const std::int64_t N = n, P = p, K = k, MM = M;
  // k(3/2 n^2 + n(3p + 7/2) - 3(p-1)p - 1) + n^2/2 + 11n + 2Mk(4 ceil(log M) - 8) + 4Mn - 2
  const std::int64_t poly = K * (3 * N * (N + 1) / 2 + 2 * N + 3 * N * P - 3 * (P - 1) * P - 1);
  const std::int64_t rest = ceil_div(N * N, 2) + 11 * N + 2 * MM * K * (4 * ceil_log2(M) - 8) + 4 * MM * N - 2;
  return std::max<std::int64_t>(0, poly + rest);
}

[[nodiscard]] inline ResourceCount arcsin_sqrt_resources(const FixedPointFormat& f, const PolyParams& pp) {
  validate(f);
  const std::int64_t n = f.n;
  const std::int64_t depth = (5 * n + 3) + t_pp(f.n, pp.k, pp.M, pp.z) + 8 * n + 6;
  return toffoli_gadget(tf_arcsq(f.n, f.p, pp.k, pp.M), depth, q_pp(f.n, pp.k, pp.M) + 2 * n + 1);
}

// ---- rotations ----

// Single-qubit rotation synthesized to precision eps: T-depth 3 log2(1/eps).
[[nodiscard]] inline ResourceCount rotation_resources(double eps) {
  require(eps > 0.0 && eps < 1.0, "rotation precision must lie in (0,1)");
  const auto d = static_cast<std::int64_t>(std::ceil(3.0 * std::log2(1.0 / eps)));
  return {0, d, d, 0};
}

// n~ = n - max(floor(log2(arcsin eps)) + (n - p), 0): bits whose rotation is below eps are dropped.
[[nodiscard]] inline int effective_rotation_bits(const FixedPointFormat& f, double eps) {
  validate(f);
  require(eps > 0.0 && eps <= 1.0, "rotation precision must lie in (0,1]");
  const auto fl = static_cast<std::int64_t>(std::floor(std::log2(std::asin(eps))));
  return f.n - static_cast<int>(std::max<std::int64_t>(fl + (f.n - f.p), 0));
}

// Ry on a target controlled by each bit of a register: 3 n~ log2(n~/eps).
[[nodiscard]] inline std::int64_t controlled_rotation_depth(const FixedPointFormat& f, double eps) {
  const int nt = effective_rotation_bits(f, eps);
  return static_cast<std::int64_t>(std::ceil(3.0 * nt * std::log2(nt / eps)));
}

// Each controlled rotation uses 3 synthesized rotations at depth one plus one ancilla.
[[nodiscard]] inline ResourceCount controlled_rotation_resources(const FixedPointFormat& f, double eps) {
  const std::int64_t depth = controlled_rotation_depth(f, eps);
  return {0, 3 * depth, depth, 1};
}

// Register rotation without bit dropping: 3 n log2(n/eps).
[[nodiscard]] inline std::int64_t register_rotation_depth(int n, double eps) {
  require(n >= 1 && eps > 0.0, "register rotation needs n >= 1, eps > 0");
  return static_cast<std::int64_t>(std::ceil(3.0 * n * std::log2(n / eps)));
}

}  // namespace qdp
