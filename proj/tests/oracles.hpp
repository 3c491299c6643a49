#ifndef SPHDESIGN_TESTS_ORACLES_HPP
#define SPHDESIGN_TESTS_ORACLES_HPP

// Test-side reference computations, kept independent of the library code.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

//! Composite Simpson rule on [a,b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

//! Gauss-Legendre nodes/weights on [-1,1] via Newton on std::legendre.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) {
    for (int i = 1; i <= n; ++i) {
      double z = std::cos(pi * (i - 0.25) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        const double p = std::legendre(n, z);
        const double dp = n * (z * p - std::legendre(n - 1, z)) / (z * z - 1.0);
        const double dz = p / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      const double dp = n * (z * std::legendre(n, z) - std::legendre(n - 1, z)) / (z * z - 1.0);
      x.push_back(z);
      w.push_back(2.0 / ((1.0 - z * z) * dp * dp));
    }
  }
  //! Integral of f over [a,b].
  double integrate(const std::function<double(double)>& f, double a, double b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(0.5 * (b - a) * x[i] + 0.5 * (a + b));
    return 0.5 * (b - a) * s;
  }
};

//! Cartesian point of S_m from hyperspherical angles.
inline std::vector<double> cartesian(const std::vector<double>& thetas, double phi) {
  std::vector<double> x;
  double s = 1.0;
  for (double t : thetas) {
    x.push_back(s * std::cos(t));
    s *= std::sin(t);
  }
  x.push_back(s * std::cos(phi));
  x.push_back(s * std::sin(phi));
  return x;
}

}  // namespace oracle

#endif
