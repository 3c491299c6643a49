#ifndef SPHDESIGN_DESIGN_HPP
#define SPHDESIGN_DESIGN_HPP

// Approximate designs on [0,pi]^(m-2) x [-pi,pi] and their information matrices.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "harmonics.hpp"
#include "quadrature.hpp"
#include "special.hpp"

namespace sphdesign {

//! Total solid angle of S_m: N_m / (m-2)!!.
inline double omega_tilde(int m) { return n_constant(m) / double_factorial(m - 2); }

enum class Axis { theta, phi };

//! One-dimensional design: strictly increasing support on [0,pi] (theta) or [-pi,pi] (phi).
class MarginalDesign {
public:
  MarginalDesign(std::vector<double> support, std::vector<double> weights, Axis axis)
      : support_(std::move(support)), weights_(std::move(weights)), axis_(axis) {
    detail::require(!support_.empty(), "MarginalDesign: empty support");
    detail::require(support_.size() == weights_.size(), "MarginalDesign: support and weights differ in length");
    const double lo = axis_ == Axis::theta ? 0.0 : -pi;
    for (std::size_t j = 0; j < support_.size(); ++j) {
      detail::require(support_[j] >= lo && support_[j] <= pi, "MarginalDesign: support point outside its domain");
      detail::require(weights_[j] > 0.0, "MarginalDesign: weights must be positive");
      if (j > 0) detail::require(support_[j] > support_[j - 1], "MarginalDesign: support must be strictly increasing");
    }
    detail::require(std::abs(compensated_sum(weights_) - 1.0) <= 1e-14, "MarginalDesign: weights must sum to one");
  }

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  Axis axis() const { return axis_; }
  std::size_t size() const { return support_.size(); }

private:
  std::vector<double> support_;
  std::vector<double> weights_;
  Axis axis_;
};

//! Equally weighted azimuths beta + 2 pi j / t, j = 1..t.
struct UniformAzimuth {
  int t = 1;
  double beta = -pi;

  MarginalDesign marginal() const {
    detail::require(t >= 1, "UniformAzimuth: t must be >= 1");
    std::vector<double> pts;
    std::vector<double> w(static_cast<std::size_t>(t), 1.0 / t);
    for (int j = 1; j <= t; ++j) pts.push_back(beta + 2.0 * pi * j / t);
    // beta = -pi puts the last point on pi up to rounding
    if (pts.back() > pi && pts.back() - pi <= 8 * std::numeric_limits<double>::epsilon()) pts.back() = pi;
    return MarginalDesign(std::move(pts), std::move(w), Axis::phi);
  }
};

class SupportPointDesign;

//! Tensor design zeta_1 x ... x zeta_{m-2} x nu.
class ProductDesign {
public:
  ProductDesign(int m, std::vector<MarginalDesign> marginals, UniformAzimuth azimuth)
      : m_(m), marginals_(std::move(marginals)), azimuth_(azimuth), nu_(azimuth.marginal()) {
    detail::require(m >= 3, "ProductDesign: m must be >= 3");
    detail::require(static_cast<int>(marginals_.size()) == m - 2, "ProductDesign: need exactly m-2 polar marginals");
    for (const auto& mg : marginals_) detail::require(mg.axis() == Axis::theta, "ProductDesign: polar marginal on phi axis");
  }

  int sphere_dim() const { return m_; }
  const std::vector<MarginalDesign>& marginals() const { return marginals_; }
  const UniformAzimuth& azimuth() const { return azimuth_; }
  const MarginalDesign& azimuthal() const { return nu_; }

  std::size_t support_size() const {
    std::size_t n = nu_.size();
    for (const auto& mg : marginals_) n *= mg.size();
    return n;
  }

  //! Visits every (point, weight) of the expanded support in lexicographic
  //! marginal order (first polar axis slowest, azimuth fastest).
  template <class Visitor>
  void for_each_point(Visitor&& visit) const {
    const std::size_t k = marginals_.size();
    std::vector<std::size_t> pos(k, 0);
    AngleVector ang;
    ang.thetas.resize(k);
    while (true) {
      double w = 1.0;
      for (std::size_t i = 0; i < k; ++i) {
        ang.thetas[i] = marginals_[i].support()[pos[i]];
        w *= marginals_[i].weights()[pos[i]];
      }
      for (std::size_t j = 0; j < nu_.size(); ++j) {
        ang.phi = nu_.support()[j];
        visit(static_cast<const AngleVector&>(ang), w * nu_.weights()[j]);
      }
      std::size_t i = k;
      while (i > 0) {
        --i;
        if (++pos[i] < marginals_[i].size()) break;
        pos[i] = 0;
        if (i == 0) return;
      }
    }
  }

  SupportPointDesign expand() const;

private:
  int m_;
  std::vector<MarginalDesign> marginals_;
  UniformAzimuth azimuth_;
  MarginalDesign nu_;
};

//! Finite design with arbitrary support points.
class SupportPointDesign {
public:
  SupportPointDesign(std::vector<AngleVector> points, std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    detail::require(!points_.empty(), "SupportPointDesign: empty support");
    detail::require(points_.size() == weights_.size(), "SupportPointDesign: points and weights differ in length");
    const int m = points_.front().sphere_dim();
    for (std::size_t j = 0; j < points_.size(); ++j) {
      validate_angles(points_[j], m);
      detail::require(weights_[j] > 0.0, "SupportPointDesign: weights must be positive");
    }
    detail::require(std::abs(compensated_sum(weights_) - 1.0) <= 1e-12, "SupportPointDesign: weights must sum to one");
  }

  int sphere_dim() const { return points_.front().sphere_dim(); }
  const std::vector<AngleVector>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t support_size() const { return points_.size(); }

  template <class Visitor>
  void for_each_point(Visitor&& visit) const {
    for (std::size_t j = 0; j < points_.size(); ++j) visit(points_[j], weights_[j]);
  }

private:
  std::vector<AngleVector> points_;
  std::vector<double> weights_;
};

inline SupportPointDesign ProductDesign::expand() const {
  std::vector<AngleVector> pts;
  std::vector<double> w;
  pts.reserve(support_size());
  w.reserve(support_size());
  for_each_point([&](const AngleVector& a, double wt) {
    pts.push_back(a);
    w.push_back(wt);
  });
  return SupportPointDesign(std::move(pts), std::move(w));
}

//! Symmetric positive semidefinite moment matrix of a design.
class InformationMatrix {
public:
  InformationMatrix() = default;
  explicit InformationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    detail::require(m_.rows() == m_.cols(), "InformationMatrix: matrix must be square");
  }

  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  double asymmetry() const { return (m_ - m_.transpose()).cwiseAbs().maxCoeff(); }

  //! Ascending eigenvalues.
  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  //! Symmetric within 1e-13 and no eigenvalue below -1e-10 * lambda_max.
  bool is_valid() const {
    if (asymmetry() > 1e-13) return false;
    const auto ev = eigenvalues();
    return ev(0) >= -1e-10 * std::max(ev(ev.size() - 1), 0.0);
  }

  //! Numerical rank with the relative threshold used for generalized inverses.
  Eigen::Index rank(double rel_tol = 1e-10) const {
    const auto ev = eigenvalues();
    const double cut = rel_tol * std::max(ev(ev.size() - 1), 0.0);
    return (ev.array() > cut).count();
  }

private:
  Eigen::MatrixXd m_;
};

//! M = sum_x w f(x) f(x)^T over the (expanded) support; compensated accumulation
//! in the design's fixed point order, so results are bit-reproducible.
template <class Design, FeatureMap Model>
InformationMatrix info_matrix(const Design& design, const Model& model) {
  detail::require(design.sphere_dim() == model.sphere_dim(), "info_matrix: design and model live on different spheres");
  const auto n = static_cast<Eigen::Index>(model.dimension());
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(n * (n + 1) / 2));
  design.for_each_point([&](const AngleVector& ang, double w) {
    const Eigen::VectorXd f = model(ang);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) acc[k++].add(w * f(i) * f(j));
  });
  Eigen::MatrixXd m(n, n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      m(i, j) = acc[k++].value();
      m(j, i) = m(i, j);
    }
  return InformationMatrix(std::move(m));
}

//! Information matrix of the uniform distribution on S_m: I_D / Omega.
inline InformationMatrix uniform_continuous_info(const HarmonicBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.dimension());
  return InformationMatrix(Eigen::MatrixXd::Identity(n, n) / omega_tilde(basis.sphere_dim()));
}

//! Discrete optimal product design: Gaussian marginals for the weights
//! (1-x^2)^((m-i-2)/2) with r nodes mapped through arccos, and t equally
//! weighted azimuths beta + 2 pi j / t. Requires d+1 <= r <= 2d,
//! t >= 2d+1 and -(t+1)pi/t < beta <= -pi.
inline ProductDesign optimal_product_design(int m, int d, int r, int t, double beta) {
  detail::require(m >= 3, "optimal_product_design: m must be >= 3");
  detail::require(d >= 0, "optimal_product_design: d must be >= 0");
  const int r_lo = d + 1;
  const int r_hi = std::max(2 * d, d + 1);  // d = 0 admits the single-node rule
  if (r < r_lo || r > r_hi) {
    std::ostringstream os;
    os << "optimal_product_design: r = " << r << " violates d+1 <= r <= 2d (" << r_lo << " <= r <= " << r_hi << ")";
    throw ParameterError(os.str());
  }
  if (t < 2 * d + 1) {
    std::ostringstream os;
    os << "optimal_product_design: t = " << t << " violates t >= 2d+1 = " << 2 * d + 1;
    throw ParameterError(os.str());
  }
  const double beta_lo = -(t + 1.0) * pi / t;
  if (!(beta > beta_lo && beta <= -pi)) {
    std::ostringstream os;
    os.precision(17);
    os << "optimal_product_design: beta = " << beta << " violates -(t+1)pi/t < beta <= -pi (" << beta_lo << ", " << -pi
       << "]";
    throw ParameterError(os.str());
  }

  std::vector<MarginalDesign> marginals;
  for (int i = 1; i <= m - 2; ++i) {
    const auto rule = gauss_rule(0.5 * (m - i - 2), r);
    // theta = arccos x is decreasing in x: reverse to keep the support increasing
    std::vector<double> th(rule.nodes.size());
    std::vector<double> w(rule.weights.rbegin(), rule.weights.rend());
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
      th[rule.nodes.size() - 1 - j] = std::acos(std::clamp(rule.nodes[j], -1.0, 1.0));
    marginals.emplace_back(std::move(th), std::move(w), Axis::theta);
  }
  return ProductDesign(m, std::move(marginals), UniformAzimuth{t, beta});
}

//! Default parameters r = d+1, t = 2d+1, beta = -pi.
inline ProductDesign optimal_product_design(int m, int d) { return optimal_product_design(m, d, d + 1, 2 * d + 1, -pi); }

struct ComparisonDesigns {
  ProductDesign grid;          // uniform weights on {0, pi/4, pi/2, 3pi/4, pi}^2
  ProductDesign equal_weight;  // optimal support, uniform weights 1/5
};

//! The two uniform m=4, d=4 comparison designs; both use the optimal azimuthal marginal.
inline ComparisonDesigns comparison_designs_example1() {
  const auto opt = optimal_product_design(4, 4, 5, 9, -pi);
  const std::vector<double> fifth(5, 0.2);
  const std::vector<double> grid{0.0, pi / 4.0, pi / 2.0, 3.0 * pi / 4.0, pi};
  ProductDesign hat(4, {MarginalDesign(grid, fifth, Axis::theta), MarginalDesign(grid, fifth, Axis::theta)},
                    opt.azimuth());
  ProductDesign tilde(4,
                      {MarginalDesign(opt.marginals()[0].support(), fifth, Axis::theta),
                       MarginalDesign(opt.marginals()[1].support(), fifth, Axis::theta)},
                      opt.azimuth());
  return {std::move(hat), std::move(tilde)};
}

//! Rounds n * w to integers summing to n by largest-remainder apportionment.
//! Ties are broken towards the lower index.
inline std::vector<long> round_to_counts(const std::vector<double>& weights, long n) {
  detail::require(n >= 0, "round_to_counts: negative sample size");
  detail::require(!weights.empty(), "round_to_counts: empty weight vector");
  std::vector<long> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> rem;
  long assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    detail::require(weights[i] >= 0.0, "round_to_counts: negative weight");
    const double q = weights[i] * static_cast<double>(n);
    counts[i] = static_cast<long>(std::floor(q));
    assigned += counts[i];
    rem.emplace_back(q - std::floor(q), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[rem[k % rem.size()].second];
  return counts;
}

}  // namespace sphdesign

#endif
