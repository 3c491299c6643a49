#ifndef SPHDESIGN_SPECIAL_HPP
#define SPHDESIGN_SPECIAL_HPP

// Factorial-type helpers. Everything that may mix half-integer Gamma values
// goes through log-gamma.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "errors.hpp"

namespace sphdesign {

inline constexpr double pi = std::numbers::pi;

inline double log_factorial(int n) {
  detail::require(n >= 0, "log_factorial: negative argument");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

//! n!! with the conventions 0!! = (-1)!! = 1.
inline double double_factorial(int n) {
  detail::require(n >= -1, "double_factorial: argument below -1");
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

//! Exact binomial coefficient for the small arguments used in dimension counts.
inline std::uint64_t binomial(int n, int k) {
  detail::require(n >= 0 && k >= 0 && k <= n, "binomial: invalid arguments");
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

//! Neumaier-compensated accumulator.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

//! sin/cos of phi that are exact when phi is a multiple of pi/2 in double arithmetic.
struct SinCos {
  double sin;
  double cos;
};

inline SinCos exact_sincos(double phi) {
  const double q = std::nearbyint(phi / (pi / 2.0));
  if (q * (pi / 2.0) == phi) {
    switch (((static_cast<long long>(q) % 4) + 4) % 4) {
      case 0: return {0.0, 1.0};
      case 1: return {1.0, 0.0};
      case 2: return {0.0, -1.0};
      default: return {-1.0, 0.0};
    }
  }
  return {std::sin(phi), std::cos(phi)};
}

}  // namespace sphdesign

#endif
