#ifndef SPHDESIGN_ORTHOPOLY_HPP
#define SPHDESIGN_ORTHOPOLY_HPP

// Gegenbauer (ultraspherical) and associated Legendre polynomials.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "special.hpp"

namespace sphdesign {

//! C_n^alpha(x) by upward three-term recurrence:
//! n C_n = 2(n+alpha-1) x C_{n-1} - (n+2alpha-2) C_{n-2}.
inline double gegenbauer_eval(int n, double alpha, double x) {
  detail::require(n >= 0, "gegenbauer_eval: negative degree");
  detail::require(alpha > 0.0, "gegenbauer_eval: parameter alpha must be positive");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * alpha * x;
  for (int k = 2; k <= n; ++k) {
    const double next = (2.0 * (k + alpha - 1.0) * x * cur - (k + 2.0 * alpha - 2.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  return cur;
}

//! d/dx C_n^alpha(x) = 2 alpha C_{n-1}^{alpha+1}(x).
inline double gegenbauer_derivative(int n, double alpha, double x) {
  if (n == 0) return 0.0;
  return 2.0 * alpha * gegenbauer_eval(n - 1, alpha + 1.0, x);
}

//! Squared norm of C_n^alpha under the weight (1-x^2)^(alpha-1/2) on [-1,1]:
//! pi 2^(1-2alpha) Gamma(n+2alpha) / (n! (n+alpha) Gamma(alpha)^2).
inline double gegenbauer_norm_sq(int n, double alpha) {
  detail::require(n >= 0, "gegenbauer_norm_sq: negative degree");
  detail::require(alpha > 0.0, "gegenbauer_norm_sq: parameter alpha must be positive");
  const double log_val = std::log(pi) + (1.0 - 2.0 * alpha) * std::log(2.0) + std::lgamma(n + 2.0 * alpha) -
                         log_factorial(n) - std::log(n + alpha) - 2.0 * std::lgamma(alpha);
  return std::exp(log_val);
}

//! Associated Legendre function P_l^m(x) including the Condon-Shortley phase (-1)^m.
inline double assoc_legendre_eval(int l, int m, double x) {
  detail::require(l >= 0 && m >= 0, "assoc_legendre_eval: negative degree or order");
  detail::require(m <= l, "assoc_legendre_eval: order m exceeds degree l");
  // P_m^m = (-1)^m (2m-1)!! (1-x^2)^(m/2)
  double pmm = 1.0;
  if (m > 0) {
    const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double odd = 1.0;
    for (int k = 1; k <= m; ++k) {
      pmm *= -odd * s;
      odd += 2.0;
    }
  }
  if (l == m) return pmm;
  double pm1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pm1;
  double pl = 0.0;
  for (int k = m + 2; k <= l; ++k) {
    pl = (x * (2.0 * k - 1.0) * pm1 - (k + m - 1.0) * pmm) / (k - m);
    pmm = pm1;
    pm1 = pl;
  }
  return pl;
}

//! Roots of C_n^alpha in increasing order.
//!
//! Eigenvalues of the symmetric tridiagonal Jacobi matrix of the monic
//! recurrence (zero diagonal, off-diagonal sqrt(k(k+2a-1) / (4(k+a)(k+a-1)))),
//! followed by one Newton step per root and explicit symmetrization.
inline std::vector<double> gegenbauer_roots(int n, double alpha) {
  detail::require(n >= 1, "gegenbauer_roots: degree must be at least 1");
  detail::require(alpha > 0.0, "gegenbauer_roots: parameter alpha must be positive");
  if (n == 1) return {0.0};

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) {
    const double b = k * (k + 2.0 * alpha - 1.0) / (4.0 * (k + alpha) * (k + alpha - 1.0));
    sub(k - 1) = std::sqrt(b);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "gegenbauer_roots: tridiagonal eigen-solver failed for n=" << n << ", alpha=" << alpha;
    throw NumericError(os.str());
  }

  std::vector<double> roots(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  for (double& x : roots) {
    const double d = gegenbauer_derivative(n, alpha, x);
    if (d != 0.0) x -= gegenbauer_eval(n, alpha, x) / d;
  }
  std::sort(roots.begin(), roots.end());
  for (int j = 0; j < n / 2; ++j) {
    const double h = 0.5 * (roots[n - 1 - j] - roots[j]);
    roots[j] = -h;
    roots[n - 1 - j] = h;
  }
  if (n % 2 == 1) roots[n / 2] = 0.0;

  for (int j = 1; j < n; ++j) {
    if (!(roots[j] > roots[j - 1]) || roots.front() <= -1.0 || roots.back() >= 1.0) {
      std::ostringstream os;
      os << "gegenbauer_roots: roots not strictly increasing inside (-1,1) for n=" << n << ", alpha=" << alpha;
      throw NumericError(os.str());
    }
  }
  return roots;
}

}  // namespace sphdesign

#endif
