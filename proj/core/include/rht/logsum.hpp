#ifndef RHT_LOGSUM_HPP
#define RHT_LOGSUM_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace rht {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without leaving the log domain.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

// log(exp(a) - exp(b)) for a >= b; returns -inf when they coincide.
inline double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (b >= a) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

}  // namespace rht

#endif
