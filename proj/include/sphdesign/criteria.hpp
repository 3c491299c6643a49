#ifndef SPHDESIGN_CRITERIA_HPP
#define SPHDESIGN_CRITERIA_HPP

// Selection matrices, Kiefer's Phi_p family, the Phi_Es criterion (sum of the
// s smallest eigenvalues of M) and equivalence-theorem certificates.
//
// Phi_p is the power mean ((1/s) tr C^p)^(1/p) of the eigenvalues of
// C_K = (K^T M^- K)^{-1}. The 1/s factor only rescales the criterion by a
// constant, so efficiencies and optimality statements are unaffected.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "design.hpp"
#include "errors.hpp"
#include "harmonics.hpp"

namespace sphdesign {

//! Resolution levels 0 <= k_0 < ... < k_q.
class LevelSelection {
public:
  explicit LevelSelection(std::vector<int> levels) : levels_(std::move(levels)) {
    detail::require(!levels_.empty(), "LevelSelection: at least one level is required");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      detail::require(levels_[i] >= 0, "LevelSelection: negative level");
      if (i > 0) detail::require(levels_[i] > levels_[i - 1], "LevelSelection: levels must be strictly increasing");
    }
  }

  //! All levels 0..d.
  static LevelSelection all(int d) {
    std::vector<int> v(static_cast<std::size_t>(d + 1));
    std::iota(v.begin(), v.end(), 0);
    return LevelSelection(std::move(v));
  }

  const std::vector<int>& levels() const { return levels_; }
  bool contains(int k) const { return std::binary_search(levels_.begin(), levels_.end(), k); }
  int max_level() const { return levels_.back(); }

private:
  std::vector<int> levels_;
};

//! D x s 0/1 matrix whose columns pick the coefficients of the selected levels.
class SelectionMatrix {
public:
  SelectionMatrix(Eigen::Index dim, std::vector<Eigen::Index> columns) : dim_(dim), columns_(std::move(columns)) {
    detail::require(!columns_.empty(), "SelectionMatrix: no columns selected");
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      detail::require(columns_[j] >= 0 && columns_[j] < dim_, "SelectionMatrix: column index out of range");
      for (std::size_t k = 0; k < j; ++k) detail::require(columns_[k] != columns_[j], "SelectionMatrix: duplicated column");
    }
  }

  //! K = I_D.
  static SelectionMatrix identity(Eigen::Index dim) {
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(dim));
    std::iota(cols.begin(), cols.end(), Eigen::Index{0});
    return SelectionMatrix(dim, std::move(cols));
  }

  Eigen::Index rows() const { return dim_; }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(columns_.size()); }
  const std::vector<Eigen::Index>& selected() const { return columns_; }

  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim_, cols());
    for (std::size_t j = 0; j < columns_.size(); ++j) k(columns_[j], static_cast<Eigen::Index>(j)) = 1.0;
    return k;
  }

private:
  Eigen::Index dim_;
  std::vector<Eigen::Index> columns_;
};

inline SelectionMatrix selection_matrix(const HarmonicBasis& basis, const LevelSelection& levels) {
  detail::require(levels.max_level() <= basis.order(), "selection_matrix: selected level exceeds the order d");
  std::vector<Eigen::Index> cols;
  for (std::size_t i = 0; i < basis.dimension(); ++i)
    if (levels.contains(basis.level_of(i))) cols.push_back(static_cast<Eigen::Index>(i));
  return SelectionMatrix(static_cast<Eigen::Index>(basis.dimension()), std::move(cols));
}

inline SelectionMatrix selection_matrix(int m, int d, const LevelSelection& levels) {
  return selection_matrix(HarmonicBasis(m, d), levels);
}

//! Regression model made of the selected levels only (its information matrix is K^T M K).
inline ProjectedBasis level_restricted_model(const HarmonicBasis& basis, const LevelSelection& levels) {
  return ProjectedBasis(basis, selection_matrix(basis, levels).matrix().transpose());
}

namespace detail {

struct Spectral {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

inline Spectral spectral(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigen-decomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

//! Moore-Penrose inverse of a symmetric PSD matrix; eigenvalues below
//! rel_tol * lambda_max count as zero. Also returns the range projector.
struct GeneralizedInverse {
  Eigen::MatrixXd inverse;
  Eigen::MatrixXd range_projector;
};

inline GeneralizedInverse generalized_inverse(const Eigen::MatrixXd& m, double rel_tol = 1e-10) {
  const auto sp = spectral(m);
  const double cut = rel_tol * std::max(sp.values.maxCoeff(), 0.0);
  const auto n = m.rows();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd keep = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (sp.values(i) > cut) {
      inv(i) = 1.0 / sp.values(i);
      keep(i) = 1.0;
    }
  return {sp.vectors * inv.asDiagonal() * sp.vectors.transpose(),
          sp.vectors * keep.asDiagonal() * sp.vectors.transpose()};
}

//! Symmetric matrix power through the spectral decomposition.
inline Eigen::MatrixXd sym_power(const Spectral& sp, double p) {
  Eigen::VectorXd v = sp.values.array().pow(p).matrix();
  return sp.vectors * v.asDiagonal() * sp.vectors.transpose();
}

}  // namespace detail

//! C_K = (K^T M^- K)^{-1}; throws InfeasibleDesign when range(K) is not in range(M).
inline Eigen::MatrixXd c_matrix(const InformationMatrix& info, const SelectionMatrix& k) {
  detail::require(info.dim() == k.rows(), "c_matrix: dimension mismatch between M and K");
  const auto gi = detail::generalized_inverse(info.matrix());
  const Eigen::MatrixXd km = k.matrix();
  const double resid = (km - gi.range_projector * km).cwiseAbs().maxCoeff();
  if (resid > 1e-8) {
    std::ostringstream os;
    os << "design is not feasible for the selected coefficients: range inclusion residual " << resid;
    throw InfeasibleDesign(os.str());
  }
  Eigen::MatrixXd inner = km.transpose() * gi.inverse * km;
  inner = 0.5 * (inner + inner.transpose());
  const auto sp = detail::spectral(inner);
  if (!(sp.values.minCoeff() > 0.0)) throw InfeasibleDesign("K^T M^- K is singular");
  Eigen::MatrixXd c = detail::sym_power(sp, -1.0);
  return 0.5 * (c + c.transpose());
}

inline constexpr double minus_infinity = -std::numeric_limits<double>::infinity();

//! Power mean of order p of positive values: p = 0 geometric mean, p = -inf minimum.
inline double power_mean(const Eigen::VectorXd& v, double p) {
  detail::require(p < 1.0, "Phi_p requires p < 1");
  if (std::isinf(p)) return v.minCoeff();
  const double n = static_cast<double>(v.size());
  if (p == 0.0) return std::exp(v.array().log().sum() / n);
  return std::pow(v.array().pow(p).sum() / n, 1.0 / p);
}

//! Phi_p(C_K); returns -inf for infeasible designs.
inline double phi_p(const InformationMatrix& info, const SelectionMatrix& k, double p) {
  detail::require(p < 1.0, "phi_p: p must be < 1");
  Eigen::MatrixXd c;
  try {
    c = c_matrix(info, k);
  } catch (const InfeasibleDesign&) {
    return minus_infinity;
  }
  return power_mean(detail::spectral(c).values, p);
}

//! Sum of the s smallest eigenvalues of M.
inline double phi_es(const InformationMatrix& info, int s_count) {
  detail::require(s_count >= 1 && s_count <= info.dim(), "phi_es: s must lie in [1, D]");
  const auto ev = info.eigenvalues();
  double s = 0.0;
  for (int i = 0; i < s_count; ++i) s += std::max(ev(i), 0.0);
  return s;
}

struct PhiP {
  double p;
};
struct PhiEs {
  int s;
};

//! Phi_p (with D = p 0, A = p -1, E = p -inf) or Phi_Es.
class CriterionSpec {
public:
  static CriterionSpec phi_p(double p) {
    detail::require(p < 1.0 && !std::isnan(p), "criterion: Phi_p requires p < 1");
    return CriterionSpec(PhiP{p});
  }
  static CriterionSpec d_optimality() { return phi_p(0.0); }
  static CriterionSpec a_optimality() { return phi_p(-1.0); }
  static CriterionSpec e_optimality() { return phi_p(minus_infinity); }
  static CriterionSpec phi_es(int s) {
    detail::require(s >= 1, "criterion: Phi_Es requires s >= 1");
    return CriterionSpec(PhiEs{s});
  }

  //! "D", "A", "E", "phi-p=<p>" (p may be "-inf") or "phi-es=<s>".
  static CriterionSpec parse(std::string_view text) {
    if (text == "D") return d_optimality();
    if (text == "A") return a_optimality();
    if (text == "E") return e_optimality();
    constexpr std::string_view pp = "phi-p=";
    constexpr std::string_view pe = "phi-es=";
    if (text.starts_with(pp)) {
      const auto rest = text.substr(pp.size());
      if (rest == "-inf") return e_optimality();
      double p = 0.0;
      const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), p);
      if (res.ec != std::errc{} || res.ptr != rest.data() + rest.size())
        throw ParameterError("criterion: cannot parse p in '" + std::string(text) + "'");
      return phi_p(p);
    }
    if (text.starts_with(pe)) {
      const auto rest = text.substr(pe.size());
      int s = 0;
      const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), s);
      if (res.ec != std::errc{} || res.ptr != rest.data() + rest.size())
        throw ParameterError("criterion: cannot parse s in '" + std::string(text) + "'");
      return phi_es(s);
    }
    throw ParameterError("unknown criterion '" + std::string(text) + "' (expected D, A, E, phi-p=<p> or phi-es=<s>)");
  }

  bool is_phi_p() const { return std::holds_alternative<PhiP>(kind_); }
  double p() const { return std::get<PhiP>(kind_).p; }
  int s() const { return std::get<PhiEs>(kind_).s; }

  std::string name() const {
    if (!is_phi_p()) return "phi-es=" + std::to_string(s());
    if (p() == 0.0) return "D";
    if (p() == -1.0) return "A";
    if (std::isinf(p())) return "E";
    std::ostringstream os;
    os << "phi-p=" << p();
    return os.str();
  }

  //! Criterion value; Phi_p uses C_K, Phi_Es ignores K.
  double value(const InformationMatrix& info, const SelectionMatrix& k) const {
    if (is_phi_p()) return sphdesign::phi_p(info, k, p());
    return sphdesign::phi_es(info, s());
  }

private:
  explicit CriterionSpec(std::variant<PhiP, PhiEs> kind) : kind_(kind) {}
  std::variant<PhiP, PhiEs> kind_;
};

//! Phi(design) / Phi(reference). An infeasible design has efficiency 0.
inline double efficiency(const InformationMatrix& design, const InformationMatrix& reference, const CriterionSpec& crit,
                         const SelectionMatrix& k) {
  const double ref = crit.value(reference, k);
  if (!(ref > 0.0) || std::isinf(ref)) throw InfeasibleDesign("efficiency: reference design is not feasible");
  const double val = crit.value(design, k);
  if (std::isinf(val) && val < 0.0) return 0.0;
  return val / ref;
}

template <class DesignA, class DesignB, FeatureMap Model>
double efficiency(const DesignA& design, const DesignB& reference, const CriterionSpec& crit, const Model& model,
                  const SelectionMatrix& k) {
  return efficiency(info_matrix(design, model), info_matrix(reference, model), crit, k);
}

// ---------------------------------------------------------------------------
// Equivalence-theorem certificates

//! Scan resolution: a tensor grid with endpoints on every axis, then one local
//! refinement pass around the largest grid values.
struct EquivalenceGrid {
  int theta_points = 61;
  int phi_points = 121;
  int refine_top = 5;
  int refine_factor = 3;
};

struct Certificate {
  bool feasible = true;
  bool pass = false;
  double max_directional = 0.0;
  double bound = 0.0;
  AngleVector argmax;
  std::string note;

  //! max / bound - 1; nonpositive up to rounding when the certificate passes.
  double gap() const { return max_directional / bound - 1.0; }
};

inline constexpr double certificate_rel_tol = 1e-8;

namespace detail {

struct ScanResult {
  double max_value = minus_infinity;
  AngleVector argmax;
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = 0.5 * (lo + hi);
    return v;
  }
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  v.back() = hi;
  return v;
}

//! Maximizes g(f(x)) over [0,pi]^(m-2) x [-pi,pi]; results are independent of evaluation order.
template <FeatureMap Model, class Directional>
ScanResult scan_domain(const Model& model, const EquivalenceGrid& grid, Directional&& g) {
  detail::require(grid.theta_points >= 2 && grid.phi_points >= 2, "equivalence grid needs >= 2 points per axis");
  const int m = model.sphere_dim();
  const int k = m - 2;
  const auto th = linspace(0.0, pi, grid.theta_points);
  const auto ph = linspace(-pi, pi, grid.phi_points);

  struct Hit {
    double value;
    AngleVector at;
  };
  std::vector<Hit> top;
  const auto consider = [&](const AngleVector& a, double v) {
    const auto n = static_cast<std::size_t>(std::max(grid.refine_top, 1));
    if (top.size() < n || v > top.back().value) {
      top.push_back({v, a});
      std::stable_sort(top.begin(), top.end(), [](const Hit& x, const Hit& y) { return x.value > y.value; });
      if (top.size() > n) top.pop_back();
    }
  };

  std::vector<std::size_t> pos(static_cast<std::size_t>(k), 0);
  AngleVector ang;
  ang.thetas.assign(static_cast<std::size_t>(k), 0.0);
  for (bool done = false; !done;) {
    for (int i = 0; i < k; ++i) ang.thetas[static_cast<std::size_t>(i)] = th[pos[static_cast<std::size_t>(i)]];
    for (double p : ph) {
      ang.phi = p;
      consider(ang, g(model(ang)));
    }
    done = true;
    for (int i = k - 1; i >= 0; --i) {
      auto& c = pos[static_cast<std::size_t>(i)];
      if (++c < th.size()) {
        done = false;
        break;
      }
      c = 0;
    }
  }

  ScanResult best{top.front().value, top.front().at};
  if (grid.refine_top <= 0 || grid.refine_factor <= 1) return best;

  const double hth = pi / (grid.theta_points - 1);
  const double hph = 2.0 * pi / (grid.phi_points - 1);
  const int f = grid.refine_factor;
  const int side = 2 * f + 1;
  const auto seeds = top;
  for (const auto& seed : seeds) {
    std::vector<int> off(static_cast<std::size_t>(k + 1), 0);
    for (bool done = false; !done;) {
      AngleVector a = seed.at;
      for (int i = 0; i < k; ++i)
        a.thetas[static_cast<std::size_t>(i)] =
            std::clamp(seed.at.thetas[static_cast<std::size_t>(i)] + (off[static_cast<std::size_t>(i)] - f) * hth / f, 0.0, pi);
      a.phi = std::clamp(seed.at.phi + (off[static_cast<std::size_t>(k)] - f) * hph / f, -pi, pi);
      const double v = g(model(a));
      if (v > best.max_value) best = {v, a};
      done = true;
      for (int i = k; i >= 0; --i) {
        if (++off[static_cast<std::size_t>(i)] < side) {
          done = false;
          break;
        }
        off[static_cast<std::size_t>(i)] = 0;
      }
    }
  }
  return best;
}

inline Certificate finish(const ScanResult& scan, double bound) {
  Certificate c;
  c.max_directional = scan.max_value;
  c.bound = bound;
  c.argmax = scan.argmax;
  c.pass = scan.max_value <= bound * (1.0 + certificate_rel_tol);
  return c;
}

}  // namespace detail

//! Directional-function check for Phi_p optimality of the design with information
//! matrix `info`: f^T M^- K C^(p+1) K^T M^- f <= tr C^p everywhere
//! (p = -inf: lambda_min f^T M^- K E K^T M^- f <= 1 with E the normalized
//! projector on the smallest eigenspace of C).
template <FeatureMap Model>
Certificate equivalence_check_phi_p(const InformationMatrix& info, const Model& model, const SelectionMatrix& k, double p,
                                    const EquivalenceGrid& grid = {}) {
  detail::require(p < 1.0, "equivalence_check_phi_p: p must be < 1");
  detail::require(info.dim() == static_cast<Eigen::Index>(model.dimension()), "equivalence_check_phi_p: model/M mismatch");
  Eigen::MatrixXd c;
  try {
    c = c_matrix(info, k);
  } catch (const InfeasibleDesign& e) {
    Certificate cert;
    cert.feasible = false;
    cert.pass = false;
    cert.max_directional = std::numeric_limits<double>::infinity();
    cert.bound = 0.0;
    cert.note = e.what();
    return cert;
  }
  const auto gi = detail::generalized_inverse(info.matrix());
  const Eigen::MatrixXd gk = gi.inverse * k.matrix();
  const auto sp = detail::spectral(c);
  Eigen::MatrixXd kernel;
  double bound = 0.0;
  if (std::isinf(p)) {
    const double lmin = sp.values.minCoeff();
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(c.rows(), c.cols());
    int mult = 0;
    for (Eigen::Index i = 0; i < sp.values.size(); ++i)
      if (sp.values(i) <= lmin * (1.0 + 1e-9)) {
        proj += sp.vectors.col(i) * sp.vectors.col(i).transpose();
        ++mult;
      }
    kernel = gk * (proj / mult) * gk.transpose();
    bound = 1.0 / lmin;
  } else {
    kernel = gk * detail::sym_power(sp, p + 1.0) * gk.transpose();
    bound = sp.values.array().pow(p).sum();
  }
  kernel = 0.5 * (kernel + kernel.transpose());
  const auto scan = detail::scan_domain(model, grid, [&](const Eigen::VectorXd& f) { return f.dot(kernel * f); });
  return detail::finish(scan, bound);
}

//! Phi_Es check with the subgradient witness Gamma = K K^T:
//! sum of squared selected regressors <= sum of the s smallest eigenvalues of M, s = #columns of K.
template <FeatureMap Model>
Certificate equivalence_check_phi_es(const InformationMatrix& info, const Model& model, const SelectionMatrix& k,
                                     const EquivalenceGrid& grid = {}) {
  detail::require(info.dim() == static_cast<Eigen::Index>(model.dimension()), "equivalence_check_phi_es: model/M mismatch");
  detail::require(k.rows() == info.dim(), "equivalence_check_phi_es: K does not match M");
  const double bound = phi_es(info, static_cast<int>(k.cols()));
  const auto& sel = k.selected();
  const auto scan = detail::scan_domain(model, grid, [&](const Eigen::VectorXd& f) {
    double s = 0.0;
    for (auto j : sel) s += f(j) * f(j);
    return s;
  });
  return detail::finish(scan, bound);
}

}  // namespace sphdesign

#endif
