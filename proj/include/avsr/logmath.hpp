#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace avsr {

// Log of exact zero probability. Ordered below every finite value.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double x) { return x == kLogZero; }

// log(exp(a) + exp(b))
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> xs) {
  double max_x = kLogZero;
  for (double x : xs) max_x = std::max(max_x, x);
  if (max_x == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - max_x);
  return max_x + std::log(sum);
}

// weight * log_value, with a zero weight silencing the term even when the
// log value is kLogZero (0 * -inf would otherwise be NaN).
inline double weighted_log(double weight, double log_value) {
  if (weight == 0.0) return 0.0;
  return weight * log_value;
}

}  // namespace avsr
