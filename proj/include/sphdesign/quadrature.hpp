#ifndef SPHDESIGN_QUADRATURE_HPP
#define SPHDESIGN_QUADRATURE_HPP

// Gauss-type rules for the weights a(x) = (1-x^2)^p on [-1,1].
//
// A node set x_1 < ... < x_r with weights w_j integrates x^l exactly for
// l = 0..z (relative to the total mass of a) iff the node polynomial
// V_r = prod (x - x_j) is a-orthogonal to all polynomials of degree z-r and
// the weights are the normalized a-integrals of the Lagrange basis
// polynomials. Both halves of that statement are checkable here:
// lagrange_weights() produces the weights, verify_exactness() checks the
// moment identities and node_polynomial_residuals() checks orthogonality.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "errors.hpp"
#include "orthopoly.hpp"
#include "special.hpp"

namespace sphdesign {

//! Exponent p >= 0 of the weight (1-x^2)^p.
class WeightSpec {
public:
  explicit WeightSpec(double p) : p_(p) {
    detail::require(p >= 0.0 && std::isfinite(p), "WeightSpec: exponent must be finite and >= 0");
  }
  double exponent() const { return p_; }

private:
  double p_;
};

struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing, in [-1,1]
  std::vector<double> weights;  // positive, summing to one
  int degree = 0;               // certified exactness degree

  std::size_t size() const { return nodes.size(); }
};

//! Integral of x^l (1-x^2)^p over [-1,1]; Beta-function closed form for even l.
inline double weight_moment(double p, int ell) {
  detail::require(p >= 0.0, "weight_moment: exponent must be >= 0");
  detail::require(ell >= 0, "weight_moment: negative power");
  if (ell % 2 == 1) return 0.0;
  const double a = 0.5 * (ell + 1.0);
  const double b = p + 1.0;
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

namespace detail {

//! Monomial coefficients (ascending powers) of prod_k (x - roots[k]).
inline std::vector<double> poly_from_roots(std::span<const double> roots) {
  std::vector<double> c{1.0};
  for (double r : roots) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  return c;
}

//! Integral of poly(x) x^shift (1-x^2)^p over [-1,1], compensated contraction with the moments.
inline double integrate_poly(std::span<const double> coeffs, double p, int shift = 0) {
  CompensatedSum s;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s.add(coeffs[i] * weight_moment(p, static_cast<int>(i) + shift));
  return s.value();
}

}  // namespace detail

//! Normalized weights w_j = (1/mass) * integral of a(x) l_j(x), for arbitrary distinct nodes.
inline std::vector<double> lagrange_weights(std::span<const double> nodes, double p) {
  WeightSpec spec(p);
  const std::size_t r = nodes.size();
  detail::require(r >= 1, "lagrange_weights: empty node set");
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t k = i + 1; k < r; ++k)
      detail::require(nodes[i] != nodes[k], "lagrange_weights: duplicated nodes");

  const double mass = weight_moment(spec.exponent(), 0);
  std::vector<double> w(r);
  std::vector<double> others;
  others.reserve(r);
  for (std::size_t j = 0; j < r; ++j) {
    others.clear();
    double denom = 1.0;
    for (std::size_t k = 0; k < r; ++k) {
      if (k == j) continue;
      others.push_back(nodes[k]);
      denom *= nodes[j] - nodes[k];
    }
    const auto c = detail::poly_from_roots(others);
    w[j] = detail::integrate_poly(c, spec.exponent()) / (denom * mass);
  }
  return w;
}

//! Gaussian rule with r nodes for (1-x^2)^p: the roots of C_r^{p+1/2}, exact to degree 2r-1.
inline QuadratureRule gauss_rule(double p, int r) {
  WeightSpec spec(p);
  detail::require(r >= 1, "gauss_rule: number of nodes must be >= 1");
  QuadratureRule rule;
  rule.nodes = gegenbauer_roots(r, spec.exponent() + 0.5);
  rule.weights = lagrange_weights(rule.nodes, spec.exponent());
  // symmetric weight function: mirror-average, then renormalize the mass
  for (int j = 0; j < r / 2; ++j) {
    const double w = 0.5 * (rule.weights[j] + rule.weights[r - 1 - j]);
    rule.weights[j] = w;
    rule.weights[r - 1 - j] = w;
  }
  const double total = compensated_sum(rule.weights);
  for (double& w : rule.weights) w /= total;
  for (double w : rule.weights)
    if (!(w > 0.0)) throw NumericError("gauss_rule: non-positive weight produced");
  rule.degree = 2 * r - 1;
  return rule;
}

struct ExactnessReport {
  bool exact = false;
  int worst_power = 0;
  double max_residual = 0.0;
};

//! Checks |moment_l / mass - sum_j w_j x_j^l| <= 1e-11 for l = 0..z.
inline ExactnessReport verify_exactness(const QuadratureRule& rule, double p, int z, double tol = 1e-11) {
  WeightSpec spec(p);
  detail::require(z >= 0, "verify_exactness: negative degree");
  const double mass = weight_moment(spec.exponent(), 0);
  ExactnessReport rep;
  for (int ell = 0; ell <= z; ++ell) {
    CompensatedSum s;
    for (std::size_t j = 0; j < rule.size(); ++j) s.add(rule.weights[j] * std::pow(rule.nodes[j], ell));
    const double res = std::abs(weight_moment(spec.exponent(), ell) / mass - s.value());
    if (res > rep.max_residual) {
      rep.max_residual = res;
      rep.worst_power = ell;
    }
  }
  rep.exact = rep.max_residual <= tol;
  return rep;
}

//! |integral V_r(x) (1-x^2)^p x^l dx| for l = 0..max_power, V_r the node polynomial.
inline std::vector<double> node_polynomial_residuals(std::span<const double> nodes, double p, int max_power) {
  WeightSpec spec(p);
  const auto v = detail::poly_from_roots(nodes);
  std::vector<double> out;
  for (int ell = 0; ell <= max_power; ++ell) out.push_back(std::abs(detail::integrate_poly(v, spec.exponent(), ell)));
  return out;
}

}  // namespace sphdesign

#endif
