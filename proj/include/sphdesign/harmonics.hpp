#ifndef SPHDESIGN_HARMONICS_HPP
#define SPHDESIGN_HARMONICS_HPP

// Real hyperspherical harmonics on S_m (the unit sphere in R^m), m >= 3.
//
// Points are given by m-2 polar angles theta_i in [0,pi] and one azimuth
// phi in [-pi,pi]. A harmonic is labelled by lambda = mu_0 >= mu_1 >= ... >=
// mu_{m-3} >= 0 and a signed last index mu_{m-2} with |mu_{m-2}| <= mu_{m-3}:
//
//   Y = prod_{i=1}^{m-3} g~(mu_{i-1},mu_i) C_{mu_{i-1}-mu_i}^{mu_i+(m-i-1)/2}(cos t_i) sin^{mu_i} t_i
//       * g(mu_{m-3},|mu_{m-2}|) P_{mu_{m-3}}^{|mu_{m-2}|}(cos t_{m-2}) * psi_{mu_{m-2}}(phi)
//
// with psi_0 = 1, psi_k = sqrt2 cos(k phi), psi_{-k} = sqrt2 sin(k phi). The
// constants make the basis orthonormal with respect to the solid-angle
// element, so the uniform distribution has information matrix I / Omega.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "errors.hpp"
#include "orthopoly.hpp"
#include "special.hpp"

namespace sphdesign {

struct MultiIndex {
  int lambda = 0;
  std::vector<int> chain;  // mu_1 .. mu_{m-3}; empty for m = 3
  int last = 0;            // signed mu_{m-2}

  //! mu_{m-3} (lambda when the chain is empty).
  int chain_end() const { return chain.empty() ? lambda : chain.back(); }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

  std::string to_string() const {
    std::ostringstream os;
    os << '(' << lambda;
    for (int mu : chain) os << ',' << mu;
    os << ',' << last << ')';
    return os.str();
  }
};

struct AngleVector {
  std::vector<double> thetas;  // m-2 polar angles
  double phi = 0.0;

  int sphere_dim() const { return static_cast<int>(thetas.size()) + 2; }
};

//! Throws unless the angles lie in [0,pi]^(m-2) x [-pi,pi].
inline void validate_angles(const AngleVector& a, int m) {
  detail::require(a.sphere_dim() == m, "angle vector has the wrong number of polar angles");
  for (double t : a.thetas) detail::require(t >= 0.0 && t <= pi, "polar angle outside [0,pi]");
  detail::require(a.phi >= -pi && a.phi <= pi, "azimuth outside [-pi,pi]");
}

inline void validate_index(int m, const MultiIndex& idx) {
  detail::require(m >= 3, "sphere dimension m must be >= 3");
  detail::require(static_cast<int>(idx.chain.size()) == m - 3, "multi-index chain length must be m-3");
  int prev = idx.lambda;
  detail::require(prev >= 0, "multi-index lambda must be >= 0");
  for (int mu : idx.chain) {
    detail::require(mu >= 0 && mu <= prev, "multi-index chain must be nonincreasing and nonnegative");
    prev = mu;
  }
  detail::require(std::abs(idx.last) <= prev, "multi-index last entry exceeds chain end: " + idx.to_string());
}

//! Number of harmonics at resolution level k: (m+2k-2)(k+m-3)! / (k!(m-2)!).
inline std::size_t level_size(int m, int k) {
  detail::require(m >= 3, "level_size: m must be >= 3");
  detail::require(k >= 0, "level_size: negative level");
  const std::uint64_t num = static_cast<std::uint64_t>(m + 2 * k - 2) * binomial(k + m - 3, k);
  return static_cast<std::size_t>(num / static_cast<std::uint64_t>(m - 2));
}

//! Total basis length D for order d.
inline std::size_t basis_dimension(int m, int d) {
  detail::require(d >= 0, "basis_dimension: negative order");
  std::size_t total = 0;
  for (int k = 0; k <= d; ++k) total += level_size(m, k);
  return total;
}

//! Canonical order: lambda ascending, then mu_1, ..., mu_{m-3} ascending,
//! then the signed last entry from -mu_{m-3} to +mu_{m-3}.
inline std::vector<MultiIndex> enumerate_indices(int m, int d) {
  detail::require(m >= 3, "enumerate_indices: m must be >= 3");
  detail::require(d >= 0, "enumerate_indices: negative order");
  std::vector<MultiIndex> out;
  MultiIndex cur;
  cur.chain.assign(static_cast<std::size_t>(m - 3), 0);
  auto recurse = [&](auto&& self, int depth, int bound) -> void {
    if (depth == m - 3) {
      for (int l = -bound; l <= bound; ++l) {
        cur.last = l;
        out.push_back(cur);
      }
      return;
    }
    for (int mu = 0; mu <= bound; ++mu) {
      cur.chain[static_cast<std::size_t>(depth)] = mu;
      self(self, depth + 1, mu);
    }
  };
  for (int lambda = 0; lambda <= d; ++lambda) {
    cur.lambda = lambda;
    recurse(recurse, 0, lambda);
  }
  return out;
}

//! N_m = 2 (m-2)!! pi^(m/2) / Gamma(m/2).
inline double n_constant(int m) {
  detail::require(m >= 3, "n_constant: m must be >= 3");
  return 2.0 * double_factorial(m - 2) * std::exp(0.5 * m * std::log(pi) - std::lgamma(0.5 * m));
}

//! Value of sum_{level lambda} Y^2, independent of the angles.
inline double sum_rule_value(int m, int lambda) {
  detail::require(m >= 3 && lambda >= 0, "sum_rule_value: invalid arguments");
  const double log_ratio = log_factorial(lambda + m - 3) - log_factorial(lambda) - log_factorial(m - 3);
  return (m + 2.0 * lambda - 2.0) * double_factorial(m - 4) * std::exp(log_ratio) / n_constant(m);
}

namespace detail {

//! Normalizer of the Gegenbauer factor on polar axis `axis` (1-based): 1/sqrt(||C||^2).
inline double gegenbauer_factor_norm(int m, int axis, int upper, int lower) {
  const double alpha = lower + 0.5 * (m - axis - 1);
  return 1.0 / std::sqrt(gegenbauer_norm_sq(upper - lower, alpha));
}

//! sqrt((2l+1)(l-k)! / (4 pi (l+k)!)), k >= 0.
inline double legendre_factor_norm(int l, int k) {
  return std::sqrt((2.0 * l + 1.0) / (4.0 * pi) * std::exp(log_factorial(l - k) - log_factorial(l + k)));
}

inline double azimuthal_factor(int mu, double phi) {
  if (mu == 0) return 1.0;
  if (mu > 0) return std::sqrt(2.0) * std::cos(mu * phi);
  return std::sqrt(2.0) * std::sin(-mu * phi);
}

}  // namespace detail

//! Direct evaluation of one harmonic from its defining product.
inline double eval_harmonic(int m, const MultiIndex& idx, const AngleVector& ang) {
  validate_index(m, idx);
  detail::require(ang.sphere_dim() == m, "eval_harmonic: angle vector does not match m");
  double value = 1.0;
  int upper = idx.lambda;
  for (int i = 1; i <= m - 3; ++i) {
    const int lower = idx.chain[static_cast<std::size_t>(i - 1)];
    const double t = ang.thetas[static_cast<std::size_t>(i - 1)];
    const double alpha = lower + 0.5 * (m - i - 1);
    value *= detail::gegenbauer_factor_norm(m, i, upper, lower) * gegenbauer_eval(upper - lower, alpha, std::cos(t)) *
             std::pow(std::sin(t), lower);
    upper = lower;
  }
  const int k = std::abs(idx.last);
  const double t = ang.thetas.back();
  value *= detail::legendre_factor_norm(upper, k) * assoc_legendre_eval(upper, k, std::cos(t));
  return value * detail::azimuthal_factor(idx.last, ang.phi);
}

//! A regression model: maps a point on S_m to its vector of regressors.
template <class F>
concept FeatureMap = requires(const F& f, const AngleVector& a) {
  { f.dimension() } -> std::convertible_to<std::size_t>;
  { f.sphere_dim() } -> std::convertible_to<int>;
  { f(a) } -> std::convertible_to<Eigen::VectorXd>;
};

//! The vector f_d of all harmonics of order <= d on S_m, in canonical order.
class HarmonicBasis {
public:
  HarmonicBasis(int m, int d) : m_(m), d_(d) {
    detail::require(m >= 3, "HarmonicBasis: m must be >= 3 (m = 2 is not supported)");
    detail::require(d >= 0, "HarmonicBasis: order d must be >= 0");
    indices_ = enumerate_indices(m, d);
    levels_.reserve(indices_.size());
    for (const auto& idx : indices_) levels_.push_back(idx.lambda);
    const int n = d + 1;
    chain_norms_.resize(static_cast<std::size_t>(std::max(0, m - 3)));
    for (int i = 1; i <= m - 3; ++i) {
      auto& tab = chain_norms_[static_cast<std::size_t>(i - 1)];
      tab.assign(static_cast<std::size_t>(n * n), 0.0);
      for (int a = 0; a <= d; ++a)
        for (int b = 0; b <= a; ++b) tab[static_cast<std::size_t>(a * n + b)] = detail::gegenbauer_factor_norm(m, i, a, b);
    }
    legendre_norms_.assign(static_cast<std::size_t>(n * n), 0.0);
    for (int l = 0; l <= d; ++l)
      for (int k = 0; k <= l; ++k) legendre_norms_[static_cast<std::size_t>(l * n + k)] = detail::legendre_factor_norm(l, k);
  }

  int sphere_dim() const { return m_; }
  int order() const { return d_; }
  std::size_t dimension() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  int level_of(std::size_t i) const { return levels_[i]; }

  //! Position of `idx` in the canonical order; throws if absent.
  std::size_t position(const MultiIndex& idx) const {
    for (std::size_t i = 0; i < indices_.size(); ++i)
      if (indices_[i] == idx) return i;
    throw ParameterError("multi-index " + idx.to_string() + " is not part of the basis");
  }

  //! f_d(angles), built from per-axis factor tables.
  Eigen::VectorXd operator()(const AngleVector& ang) const {
    detail::require(ang.sphere_dim() == m_, "HarmonicBasis: angle vector does not match m");
    const int n = d_ + 1;
    const auto at = [n](int a, int b) { return static_cast<std::size_t>(a * n + b); };

    std::vector<std::vector<double>> axis(static_cast<std::size_t>(std::max(0, m_ - 3)));
    for (int i = 1; i <= m_ - 3; ++i) {
      const double t = ang.thetas[static_cast<std::size_t>(i - 1)];
      const double x = std::cos(t);
      const double s = std::sin(t);
      const auto& norms = chain_norms_[static_cast<std::size_t>(i - 1)];
      auto& tab = axis[static_cast<std::size_t>(i - 1)];
      tab.assign(static_cast<std::size_t>(n * n), 0.0);
      double sp = 1.0;
      for (int b = 0; b <= d_; ++b) {
        const double alpha = b + 0.5 * (m_ - i - 1);
        for (int a = b; a <= d_; ++a) tab[at(a, b)] = norms[at(a, b)] * gegenbauer_eval(a - b, alpha, x) * sp;
        sp *= s;
      }
    }
    std::vector<double> leg(static_cast<std::size_t>(n * n), 0.0);
    {
      const double x = std::cos(ang.thetas.back());
      for (int l = 0; l <= d_; ++l)
        for (int k = 0; k <= l; ++k) leg[at(l, k)] = legendre_norms_[at(l, k)] * assoc_legendre_eval(l, k, x);
    }
    std::vector<double> psi(static_cast<std::size_t>(2 * d_ + 1));
    for (int mu = -d_; mu <= d_; ++mu) psi[static_cast<std::size_t>(mu + d_)] = detail::azimuthal_factor(mu, ang.phi);

    Eigen::VectorXd f(static_cast<Eigen::Index>(indices_.size()));
    for (std::size_t j = 0; j < indices_.size(); ++j) {
      const auto& idx = indices_[j];
      double v = 1.0;
      int upper = idx.lambda;
      for (std::size_t i = 0; i < idx.chain.size(); ++i) {
        v *= axis[i][at(upper, idx.chain[i])];
        upper = idx.chain[i];
      }
      v *= leg[at(upper, std::abs(idx.last))] * psi[static_cast<std::size_t>(idx.last + d_)];
      f(static_cast<Eigen::Index>(j)) = v;
    }
    return f;
  }

private:
  int m_;
  int d_;
  std::vector<MultiIndex> indices_;
  std::vector<int> levels_;
  std::vector<std::vector<double>> chain_norms_;
  std::vector<double> legendre_norms_;
};

//! Linear recombination T * f_d of a harmonic basis (selected levels, symmetrized harmonics, ...).
class ProjectedBasis {
public:
  ProjectedBasis(HarmonicBasis base, Eigen::MatrixXd rows) : base_(std::move(base)), rows_(std::move(rows)) {
    detail::require(rows_.cols() == static_cast<Eigen::Index>(base_.dimension()),
                    "ProjectedBasis: coefficient matrix width must equal the basis dimension");
    detail::require(rows_.rows() >= 1, "ProjectedBasis: empty coefficient matrix");
  }

  int sphere_dim() const { return base_.sphere_dim(); }
  std::size_t dimension() const { return static_cast<std::size_t>(rows_.rows()); }
  const HarmonicBasis& base() const { return base_; }
  const Eigen::MatrixXd& coefficients() const { return rows_; }

  Eigen::VectorXd operator()(const AngleVector& ang) const { return rows_ * base_(ang); }

private:
  HarmonicBasis base_;
  Eigen::MatrixXd rows_;
};

static_assert(FeatureMap<HarmonicBasis>);
static_assert(FeatureMap<ProjectedBasis>);

}  // namespace sphdesign

#endif
