#ifndef SPHDESIGN_SYMMETRY_HPP
#define SPHDESIGN_SYMMETRY_HPP

// Symmetrized hyperspherical harmonics on S_4 for the crystallographic point
// groups 1 and 2 up to order 4, and a multiplicative-algorithm D-optimal
// search used as the reference for efficiencies in the symmetrized models.
//
// Each Z_lambda^eta is a fixed linear combination of the Y_{lambda,mu1,mu2};
// the coefficients are stored as sign * sqrt(num/den).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "criteria.hpp"
#include "design.hpp"
#include "errors.hpp"
#include "harmonics.hpp"

namespace sphdesign {

enum class PointGroup { pg1 = 1, pg2 = 2 };

inline PointGroup point_group(int g) {
  if (g == 1) return PointGroup::pg1;
  if (g == 2) return PointGroup::pg2;
  throw ParameterError("point group must be 1 or 2 (tables for groups 3-11 are not shipped)");
}

//! sign * sqrt(num / den).
struct Radical {
  int sign = 1;
  long num = 1;
  long den = 1;

  double value() const { return sign * std::sqrt(static_cast<double>(num) / static_cast<double>(den)); }
};

struct SymmetrizedTerm {
  MultiIndex index;
  Radical coeff;
};

struct SymmetrizedRow {
  int lambda = 0;
  int eta = 1;
  std::vector<SymmetrizedTerm> terms;

  std::string label() const { return "Z_" + std::to_string(lambda) + "^" + std::to_string(eta); }
};

class SymmetrizedBasisTable {
public:
  SymmetrizedBasisTable(int group, std::vector<SymmetrizedRow> rows) : group_(group), rows_(std::move(rows)) {
    detail::require(!rows_.empty(), "symmetrized table: no rows");
    for (const auto& row : rows_) {
      detail::require(!row.terms.empty(), "symmetrized table: row " + row.label() + " has no terms");
      for (const auto& t : row.terms) {
        validate_index(4, t.index);
        detail::require(t.index.lambda == row.lambda, "symmetrized table: term level differs from row level in " + row.label());
        detail::require(t.coeff.num >= 0 && t.coeff.den > 0 && (t.coeff.sign == 1 || t.coeff.sign == -1),
                        "symmetrized table: malformed coefficient in " + row.label());
      }
      for (const auto& other : rows_)
        if (&other != &row)
          detail::require(other.lambda != row.lambda || other.eta != row.eta, "symmetrized table: duplicated row " + row.label());
    }
  }

  int group() const { return group_; }
  const std::vector<SymmetrizedRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  int max_lambda() const {
    int l = 0;
    for (const auto& r : rows_) l = std::max(l, r.lambda);
    return l;
  }

  //! Index of the row labelled Z_lambda^eta.
  std::size_t find(int lambda, int eta) const {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (rows_[i].lambda == lambda && rows_[i].eta == eta) return i;
    throw ParameterError("symmetrized table has no row Z_" + std::to_string(lambda) + "^" + std::to_string(eta));
  }

  //! Coefficient matrix T (rows x basis dimension) against `basis`.
  Eigen::MatrixXd coefficient_matrix(const HarmonicBasis& basis) const {
    detail::require(basis.sphere_dim() == 4, "symmetrized table: basis must live on S_4");
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(basis.dimension()));
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& term : rows_[i].terms)
        t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(basis.position(term.index))) += term.coeff.value();
    return t;
  }

private:
  int group_;
  std::vector<SymmetrizedRow> rows_;
};

namespace detail {

inline SymmetrizedTerm term(int lambda, int mu1, int mu2, int sign, long num, long den) {
  return {MultiIndex{lambda, {mu1}, mu2}, Radical{sign, num, den}};
}

inline std::vector<SymmetrizedRow> group1_rows() {
  return {
      {0, 1, {term(0, 0, 0, 1, 1, 1)}},
      {4, 1, {term(4, 0, 0, 1, 2, 5), term(4, 4, 0, 1, 7, 20), term(4, 4, 4, 1, 1, 4)}},
      {4, 2, {term(4, 1, 0, 1, 2, 5), term(4, 3, 0, -1, 1, 10), term(4, 4, -4, -1, 1, 2)}},
      {4, 3,
       {term(4, 1, 1, 1, 2, 5), term(4, 3, 1, 1, 3, 80), term(4, 3, 3, -1, 1, 16), term(4, 4, -1, 1, 7, 16),
        term(4, 4, -3, 1, 1, 16)}},
      {4, 4,
       {term(4, 1, -1, 1, 2, 5), term(4, 3, -1, 1, 3, 80), term(4, 3, -3, 1, 1, 16), term(4, 4, 1, -1, 7, 16),
        term(4, 4, 3, 1, 1, 16)}},
      {4, 5, {term(4, 2, 0, 1, 4, 7), term(4, 4, 0, 1, 5, 28), term(4, 4, 4, -1, 1, 4)}},
      {4, 6,
       {term(4, 2, 1, 1, 2, 7), term(4, 3, -1, -1, 5, 16), term(4, 3, -3, 1, 3, 16), term(4, 4, 1, 1, 3, 112),
        term(4, 4, 3, 1, 3, 16)}},
      {4, 7,
       {term(4, 2, -1, 1, 2, 7), term(4, 3, 1, 1, 5, 16), term(4, 3, 3, 1, 3, 16), term(4, 4, -1, 1, 3, 112),
        term(4, 4, -3, -1, 3, 16)}},
      {4, 8, {term(4, 2, 2, 1, 4, 7), term(4, 4, 2, -1, 3, 7)}},
      {4, 9, {term(4, 2, -2, 1, 2, 7), term(4, 3, 2, -1, 1, 2), term(4, 4, -2, -1, 3, 14)}},
      {4, 10, {term(4, 3, -2, 1, 1, 1)}},
  };
}

}  // namespace detail

//! Built-in tables up to order 4: group 1 has 11 rows, group 2 the 7-row subset
//! Z_0^1, Z_4^1, Z_4^2, Z_4^5, Z_4^8, Z_4^9, Z_4^10.
inline SymmetrizedBasisTable builtin_table(PointGroup group) {
  auto rows = detail::group1_rows();
  if (group == PointGroup::pg1) return SymmetrizedBasisTable(1, std::move(rows));
  std::vector<SymmetrizedRow> sub;
  for (auto& r : rows)
    if (r.lambda == 0 || r.eta == 1 || r.eta == 2 || r.eta == 5 || r.eta == 8 || r.eta == 9 || r.eta == 10)
      sub.push_back(std::move(r));
  return SymmetrizedBasisTable(2, std::move(sub));
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline long parse_long(std::string_view s, std::size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParameterError("coefficient table line " + std::to_string(line_no) + ": '" + std::string(s) + "' is not an integer");
  return v;
}

}  // namespace detail

//! Reads a coefficient table with header
//! group,eta,lambda,mu1,mu2,coeff_num,coeff_den,sign (coefficient sign*sqrt(num/den)),
//! keeping the rows of `group`. Rows appear in order of first occurrence.
inline SymmetrizedBasisTable load_table_csv(std::istream& in, int group) {
  static constexpr std::string_view columns[] = {"group", "eta", "lambda", "mu1", "mu2", "coeff_num", "coeff_den", "sign"};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<SymmetrizedRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (!header) {
      detail::require(f.size() == 8 && std::equal(f.begin(), f.end(), std::begin(columns)),
                      "coefficient table: header must be group,eta,lambda,mu1,mu2,coeff_num,coeff_den,sign");
      header = true;
      continue;
    }
    detail::require(f.size() == 8, "coefficient table line " + std::to_string(line_no) + ": expected 8 fields");
    long v[8];
    for (int i = 0; i < 8; ++i) v[i] = detail::parse_long(f[static_cast<std::size_t>(i)], line_no);
    if (v[0] != group) continue;
    const int eta = static_cast<int>(v[1]);
    const int lambda = static_cast<int>(v[2]);
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SymmetrizedRow& r) { return r.lambda == lambda && r.eta == eta; });
    if (it == rows.end()) {
      rows.push_back({lambda, eta, {}});
      it = std::prev(rows.end());
    }
    it->terms.push_back(detail::term(lambda, static_cast<int>(v[3]), static_cast<int>(v[4]), static_cast<int>(v[7]), v[5], v[6]));
  }
  detail::require(header, "coefficient table: missing header");
  detail::require(!rows.empty(), "coefficient table: no rows for group " + std::to_string(group));
  return SymmetrizedBasisTable(group, std::move(rows));
}

inline SymmetrizedBasisTable load_table_csv(const std::string& path, int group) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open coefficient table '" + path + "'");
  return load_table_csv(in, group);
}

struct OrthonormalityReport {
  double max_norm_deviation = 0.0;  // max | ||row||_2 - 1 |
  double max_cross = 0.0;           // max |<row_a, row_b>| over distinct rows of equal lambda
  bool ok(double tol = 1e-12) const { return max_norm_deviation <= tol && max_cross <= tol; }
};

inline OrthonormalityReport check_orthonormality(const SymmetrizedBasisTable& table) {
  const HarmonicBasis basis(4, table.max_lambda());
  const auto t = table.coefficient_matrix(basis);
  OrthonormalityReport rep;
  for (Eigen::Index a = 0; a < t.rows(); ++a) {
    rep.max_norm_deviation = std::max(rep.max_norm_deviation, std::abs(t.row(a).norm() - 1.0));
    for (Eigen::Index b = a + 1; b < t.rows(); ++b)
      if (table.rows()[static_cast<std::size_t>(a)].lambda == table.rows()[static_cast<std::size_t>(b)].lambda)
        rep.max_cross = std::max(rep.max_cross, std::abs(t.row(a).dot(t.row(b))));
  }
  return rep;
}

//! Regression model whose regressors are the table's symmetrized harmonics.
class SymmetrizedModel {
public:
  explicit SymmetrizedModel(SymmetrizedBasisTable table)
      : table_(std::move(table)), proj_(make_projection(table_)) {}

  int sphere_dim() const { return 4; }
  std::size_t dimension() const { return table_.size(); }
  const SymmetrizedBasisTable& table() const { return table_; }
  const Eigen::MatrixXd& coefficients() const { return proj_.coefficients(); }
  const HarmonicBasis& base() const { return proj_.base(); }

  Eigen::VectorXd operator()(const AngleVector& ang) const { return proj_(ang); }

private:
  static ProjectedBasis make_projection(const SymmetrizedBasisTable& t) {
    HarmonicBasis basis(4, t.max_lambda());
    auto coeffs = t.coefficient_matrix(basis);
    return ProjectedBasis(std::move(basis), std::move(coeffs));
  }

  SymmetrizedBasisTable table_;
  ProjectedBasis proj_;
};

static_assert(FeatureMap<SymmetrizedModel>);

inline Eigen::VectorXd eval_symmetrized(const SymmetrizedModel& model, const AngleVector& ang) {
  validate_angles(ang, 4);
  return model(ang);
}

//! Information matrix in the symmetrized model, assembled from the Z values directly.
template <class Design>
InformationMatrix symmetrized_info(const SymmetrizedModel& model, const Design& design) {
  return info_matrix(design, model);
}

// ---------------------------------------------------------------------------
// D-optimal reference search

struct CandidateGrid {
  std::vector<AngleVector> points;

  //! Polar axes: n_theta Chebyshev points (pi/2)(1 - cos((2k+1)pi/(2 n_theta))); azimuth:
  //! n_phi equispaced cell midpoints -pi + 2pi(j+1/2)/n_phi.
  static CandidateGrid chebyshev_tensor(int m, int n_theta = 25, int n_phi = 24) {
    detail::require(m >= 3, "candidate grid: m must be >= 3");
    detail::require(n_theta >= 1 && n_phi >= 1, "candidate grid: need at least one point per axis");
    std::vector<double> th(static_cast<std::size_t>(n_theta));
    for (int k = 0; k < n_theta; ++k)
      th[static_cast<std::size_t>(k)] = 0.5 * pi * (1.0 - std::cos((2.0 * k + 1.0) * pi / (2.0 * n_theta)));
    std::vector<double> ph(static_cast<std::size_t>(n_phi));
    for (int j = 0; j < n_phi; ++j) ph[static_cast<std::size_t>(j)] = -pi + 2.0 * pi * (j + 0.5) / n_phi;

    CandidateGrid g;
    const int k = m - 2;
    std::vector<std::size_t> pos(static_cast<std::size_t>(k), 0);
    for (bool done = false; !done;) {
      AngleVector a;
      for (int i = 0; i < k; ++i) a.thetas.push_back(th[pos[static_cast<std::size_t>(i)]]);
      for (double p : ph) {
        a.phi = p;
        g.points.push_back(a);
      }
      done = true;
      for (int i = k - 1; i >= 0; --i) {
        if (++pos[static_cast<std::size_t>(i)] < th.size()) {
          done = false;
          break;
        }
        pos[static_cast<std::size_t>(i)] = 0;
      }
    }
    return g;
  }
};

struct DOptimalResult {
  SupportPointDesign design;
  double d_value = 0.0;          // det(M)^(1/k)
  double log_det = 0.0;
  double kw_ratio = 0.0;         // max_x f^T M^{-1} f / k
  int iterations = 0;
  std::vector<double> log_det_history;
};

//! Thrown when the search stops before the KW bound is met; carries the best iterate.
class SearchNotConverged : public NumericError {
public:
  SearchNotConverged(const std::string& what, std::vector<double> weights, double kw_ratio)
      : NumericError(what), weights_(std::move(weights)), kw_ratio_(kw_ratio) {}
  const std::vector<double>& best_weights() const { return weights_; }
  double kw_gap() const { return kw_ratio_ - 1.0; }

private:
  std::vector<double> weights_;
  double kw_ratio_;
};

//! D-optimal weights on a fixed candidate grid, started from uniform weights,
//! until max_x d(x) <= k (1 + tol) with d(x) = f(x)^T M^{-1} f(x).
//!
//! Multiplicative steps w <- w d(x) / k run until the gap drops below
//! `switch_gap`; the remaining iterations are rank-one moves
//! w <- (1-b) w + b e_x towards the largest d(x), or away from the smallest d(x)
//! on the support, with the log-det maximizing b = (d - k) / (k (d - 1)).
//! Every iteration increases log det M.
template <FeatureMap Model>
DOptimalResult d_optimal_search(const Model& model, const CandidateGrid& grid, int max_iter = 1000000, double tol = 1e-6,
                                double switch_gap = 1e-3) {
  detail::require(!grid.points.empty(), "d_optimal_search: empty candidate grid");
  detail::require(max_iter >= 1 && tol > 0.0, "d_optimal_search: need max_iter >= 1 and tol > 0");
  const auto n = static_cast<Eigen::Index>(grid.points.size());
  const auto k = static_cast<Eigen::Index>(model.dimension());
  const double kd = static_cast<double>(k);
  Eigen::MatrixXd g(k, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    validate_angles(grid.points[static_cast<std::size_t>(i)], model.sphere_dim());
    g.col(i) = model(grid.points[static_cast<std::size_t>(i)]);
  }

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd minv;
  Eigen::VectorXd dv;
  double log_det = 0.0;
  // exact refresh of M^{-1}, d and log det from the weights
  const auto refresh = [&] {
    const Eigen::MatrixXd mm = g * w.asDiagonal() * g.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(mm);
    if (llt.info() != Eigen::Success)
      throw InfeasibleDesign("d_optimal_search: candidate grid does not support a nonsingular information matrix");
    log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    minv = llt.solve(Eigen::MatrixXd::Identity(k, k));
    dv = llt.matrixL().solve(g).colwise().squaredNorm().transpose();
  };

  DOptimalResult res{SupportPointDesign({grid.points.front()}, {1.0})};
  refresh();
  bool multiplicative = true;
  int since_refresh = 0;
  int it = 0;
  double ratio = 0.0;
  for (;; ++it) {
    res.log_det_history.push_back(log_det);
    Eigen::Index imax = 0;
    ratio = dv.maxCoeff(&imax) / kd;
    if (ratio <= 1.0 + tol) {
      refresh();
      ratio = dv.maxCoeff(&imax) / kd;
      if (ratio <= 1.0 + tol) break;
    }
    if (it >= max_iter) {
      std::ostringstream os;
      os << "d_optimal_search: no convergence in " << max_iter << " iterations (KW gap " << ratio - 1.0 << ")";
      throw SearchNotConverged(os.str(), std::vector<double>(w.data(), w.data() + n), ratio);
    }
    if (multiplicative) {
      w = (w.array() * dv.array() / kd).matrix();
      w /= w.sum();
      refresh();
      multiplicative = ratio - 1.0 > switch_gap;
      continue;
    }

    Eigen::Index jmin = -1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (w(j) > 0.0 && (jmin < 0 || dv(j) < dv(jmin))) jmin = j;
    const bool away = 1.0 - dv(jmin) / kd > ratio - 1.0;
    const Eigen::Index x = away ? jmin : imax;
    const double d = dv(x);
    double b = (d - kd) / (kd * (d - 1.0));
    bool drop = false;
    if (away) {
      const double floor_b = -w(x) / (1.0 - w(x));
      if (!(d > 1.0) || b <= floor_b) {
        b = floor_b;
        drop = true;
      }
    }
    w *= 1.0 - b;
    w(x) += b;
    if (drop || w(x) < 0.0) w(x) = 0.0;

    const Eigen::VectorXd u = minv * g.col(x);
    const double c = 1.0 - b + b * d;
    const Eigen::VectorXd proj = g.transpose() * u;
    dv = (dv - (b / c) * proj.cwiseAbs2()) / (1.0 - b);
    minv = (minv - (b / c) * u * u.transpose()) / (1.0 - b);
    log_det += (kd - 1.0) * std::log1p(-b) + std::log(c);
    if (++since_refresh == 200) {
      w /= w.sum();
      refresh();
      since_refresh = 0;
    }
  }

  std::vector<AngleVector> pts;
  std::vector<double> ws;
  for (Eigen::Index j = 0; j < n; ++j)
    if (w(j) > 0.0) {
      pts.push_back(grid.points[static_cast<std::size_t>(j)]);
      ws.push_back(w(j));
    }
  const double total = compensated_sum(ws);
  for (double& v : ws) v /= total;
  res.design = SupportPointDesign(std::move(pts), std::move(ws));
  res.log_det = log_det;
  res.d_value = std::exp(log_det / kd);
  res.kw_ratio = ratio;
  res.iterations = it;
  return res;
}

//! D-efficiency (det M / det M_ref)^(1/k) of `design` against a search result.
template <class Design, FeatureMap Model>
double d_efficiency(const Design& design, const Model& model, const DOptimalResult& reference) {
  const auto info = info_matrix(design, model);
  const double val = phi_p(info, SelectionMatrix::identity(info.dim()), 0.0);
  if (std::isinf(val)) return 0.0;
  return val / reference.d_value;
}

}  // namespace sphdesign

#endif
