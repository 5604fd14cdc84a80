#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qdp {

// Thrown for precondition violations; message names the offending input.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a requested accuracy or size cannot be met.
struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidInput(what);
}

// Binary popcount w(n).
[[nodiscard]] constexpr std::int64_t popcount(std::int64_t n) {
  return std::popcount(static_cast<std::uint64_t>(n));
}

// floor(log2(x)) for x >= 1, exact.
[[nodiscard]] constexpr std::int64_t floor_log2(std::int64_t x) {
  if (x < 1) throw InvalidInput("floor_log2 argument < 1");
  return std::bit_width(static_cast<std::uint64_t>(x)) - 1;
}

// floor(log2(a/b)) for rational a/b >= 1, exact.
[[nodiscard]] constexpr std::int64_t floor_log2_ratio(std::int64_t a, std::int64_t b) {
  if (b < 1 || a < b) throw InvalidInput("floor_log2 ratio argument < 1");
  std::int64_t k = 0;
  while (a >= 2 * b) {
    b *= 2;
    ++k;
  }
  return k;
}

// ceil(log2(x)) for x >= 1, exact; ceil_log2(1) == 0.
[[nodiscard]] constexpr std::int64_t ceil_log2(std::int64_t x) {
  if (x < 1) throw InvalidInput("ceil_log2 argument < 1");
  return x == 1 ? 0 : std::bit_width(static_cast<std::uint64_t>(x - 1));
}

[[nodiscard]] constexpr std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

[[nodiscard]] constexpr std::int64_t binom2(std::int64_t d) { return d * (d - 1) / 2; }

// Neumaier compensated accumulator.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  [[nodiscard]] double value() const { return sum + comp; }
};

}  // namespace qdp
