#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <sphdesign/symmetry.hpp>

#include "oracles.hpp"

using namespace sphdesign;

namespace {

std::string table_to_csv(const SymmetrizedBasisTable& t) {
  std::ostringstream os;
  os << "group,eta,lambda,mu1,mu2,coeff_num,coeff_den,sign\n";
  for (const auto& r : t.rows())
    for (const auto& term : r.terms)
      os << t.group() << ',' << r.eta << ',' << r.lambda << ',' << term.index.chain[0] << ',' << term.index.last << ','
         << term.coeff.num << ',' << term.coeff.den << ',' << term.coeff.sign << '\n';
  return os.str();
}

SupportPointDesign random_design(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> th(0.0, oracle::pi), ph(-oracle::pi, oracle::pi), u(0.1, 1.0);
  std::vector<AngleVector> pts;
  std::vector<double> w;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    pts.push_back(AngleVector{{th(rng), th(rng)}, ph(rng)});
    w.push_back(u(rng));
    total += w.back();
  }
  for (double& v : w) v /= total;
  // renormalize the last weight so the sum is one to rounding
  double s = 0.0;
  for (int i = 0; i + 1 < n; ++i) s += w[static_cast<std::size_t>(i)];
  w.back() = 1.0 - s;
  return SupportPointDesign(std::move(pts), std::move(w));
}

}  // namespace

TEST(SymmetrizedTable, BuiltinShapes) {
  const auto t1 = builtin_table(PointGroup::pg1);
  const auto t2 = builtin_table(PointGroup::pg2);
  EXPECT_EQ(t1.size(), 11u);
  EXPECT_EQ(t2.size(), 7u);
  EXPECT_EQ(t1.max_lambda(), 4);
  EXPECT_EQ(t1.rows()[t1.find(4, 10)].terms.size(), 1u);
  EXPECT_EQ(t1.rows()[t1.find(4, 10)].terms[0].index, (MultiIndex{4, {3}, -2}));
  EXPECT_EQ(t1.rows()[t1.find(4, 10)].label(), "Z_4^10");
  EXPECT_THROW(t2.find(4, 3), ParameterError);
  EXPECT_EQ(point_group(2), PointGroup::pg2);
  EXPECT_THROW(point_group(3), ParameterError);

  const HarmonicBasis b(4, 4);
  const auto c1 = t1.coefficient_matrix(b);
  EXPECT_NEAR(c1.row(static_cast<Eigen::Index>(t1.find(4, 1))).squaredNorm(), 2.0 / 5 + 7.0 / 20 + 1.0 / 4, 1e-15);
  EXPECT_NEAR(c1(static_cast<Eigen::Index>(t1.find(4, 1)), 30), std::sqrt(0.4), 1e-15);
  // every group-2 row appears verbatim in group 1
  const auto c2 = t2.coefficient_matrix(b);
  for (std::size_t i = 0; i < t2.size(); ++i) {
    const auto& r = t2.rows()[i];
    EXPECT_EQ(c2.row(static_cast<Eigen::Index>(i)), c1.row(static_cast<Eigen::Index>(t1.find(r.lambda, r.eta))));
  }
}

TEST(SymmetrizedTable, Orthonormal) {
  for (auto g : {PointGroup::pg1, PointGroup::pg2}) {
    const auto rep = check_orthonormality(builtin_table(g));
    EXPECT_TRUE(rep.ok()) << rep.max_norm_deviation << ' ' << rep.max_cross;
  }
  auto rows = detail::group1_rows();
  rows[1].terms[0].coeff.num = 3;
  EXPECT_FALSE(check_orthonormality(SymmetrizedBasisTable(1, rows)).ok());
}

TEST(SymmetrizedTable, GramUnderUniformDesignIsScaledIdentity) {
  const SymmetrizedModel model(builtin_table(PointGroup::pg1));
  const auto info = symmetrized_info(model, optimal_product_design(4, 4));
  EXPECT_LE((info.matrix() - Eigen::MatrixXd::Identity(11, 11) / (2 * oracle::pi * oracle::pi)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(SymmetrizedTable, Validation) {
  EXPECT_THROW(SymmetrizedBasisTable(1, {}), ParameterError);
  EXPECT_THROW(SymmetrizedBasisTable(1, {{4, 1, {detail::term(3, 0, 0, 1, 1, 1)}}}), ParameterError);
  EXPECT_THROW(SymmetrizedBasisTable(1, {{4, 1, {detail::term(4, 5, 0, 1, 1, 1)}}}), ParameterError);
  EXPECT_THROW(SymmetrizedBasisTable(1, {{4, 1, {detail::term(4, 2, 0, 1, 1, 0)}}}), ParameterError);
  EXPECT_THROW(SymmetrizedBasisTable(1, {{4, 1, {detail::term(4, 2, 0, 1, 1, 1)}}, {4, 1, {detail::term(4, 1, 0, 1, 1, 1)}}}),
               ParameterError);
}

TEST(SymmetrizedModel, EvaluationIsTheLinearCombination) {
  const SymmetrizedModel model(builtin_table(PointGroup::pg1));
  const HarmonicBasis b(4, 4);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> th(0.0, oracle::pi), ph(-oracle::pi, oracle::pi);
  for (int rep = 0; rep < 25; ++rep) {
    const AngleVector a{{th(rng), th(rng)}, ph(rng)};
    const Eigen::VectorXd f = b(a);
    const Eigen::VectorXd z = eval_symmetrized(model, a);
    for (std::size_t i = 0; i < model.table().size(); ++i) {
      double ref = 0.0;
      for (const auto& t : model.table().rows()[i].terms)
        ref += t.coeff.sign * std::sqrt(static_cast<double>(t.coeff.num) / t.coeff.den) * f(static_cast<Eigen::Index>(b.position(t.index)));
      EXPECT_NEAR(z(static_cast<Eigen::Index>(i)), ref, 1e-14);
    }
  }
  EXPECT_THROW(eval_symmetrized(model, AngleVector{{0.2}, 0.1}), ParameterError);
  EXPECT_THROW(eval_symmetrized(model, AngleVector{{0.2, -0.1}, 0.1}), ParameterError);
}

TEST(SymmetrizedModel, InfoMatrixMatchesProjection) {
  const SymmetrizedModel model(builtin_table(PointGroup::pg2));
  const HarmonicBasis b(4, 4);
  std::mt19937 rng(41);
  for (int rep = 0; rep < 5; ++rep) {
    const auto des = random_design(rng, 30);
    const auto t = model.coefficients();
    const Eigen::MatrixXd ref = t * info_matrix(des, b).matrix() * t.transpose();
    EXPECT_LE((symmetrized_info(model, des).matrix() - ref).cwiseAbs().maxCoeff(), 1e-13);
  }
  const SupportPointDesign one({AngleVector{{0.7, 1.3}, 0.2}}, {1.0});
  EXPECT_EQ(symmetrized_info(model, one).rank(), 1);
}

TEST(SymmetrizedTable, CsvRoundTrip) {
  for (auto g : {PointGroup::pg1, PointGroup::pg2}) {
    const auto t = builtin_table(g);
    std::istringstream in(table_to_csv(t));
    const auto back = load_table_csv(in, static_cast<int>(g));
    const HarmonicBasis b(4, 4);
    EXPECT_EQ(back.size(), t.size());
    EXPECT_EQ(back.coefficient_matrix(b), t.coefficient_matrix(b));
  }
  // rows of other groups are skipped
  std::istringstream mixed("group,eta,lambda,mu1,mu2,coeff_num,coeff_den,sign\n1,1,0,0,0,1,1,1\n2,1,4,3,-2,1,1,1\n");
  EXPECT_EQ(load_table_csv(mixed, 2).size(), 1u);
  std::istringstream bad_header("group,eta,lambda,mu1,mu2,num,den,sign\n1,1,0,0,0,1,1,1\n");
  EXPECT_THROW(load_table_csv(bad_header, 1), ParameterError);
  std::istringstream bad_field("group,eta,lambda,mu1,mu2,coeff_num,coeff_den,sign\n1,1,0,0,x,1,1,1\n");
  EXPECT_THROW(load_table_csv(bad_field, 1), ParameterError);
  std::istringstream empty_group("group,eta,lambda,mu1,mu2,coeff_num,coeff_den,sign\n1,1,0,0,0,1,1,1\n");
  EXPECT_THROW(load_table_csv(empty_group, 2), ParameterError);
  EXPECT_THROW(load_table_csv(std::string("/nonexistent/table.csv"), 1), ParameterError);
}

TEST(CandidateGridTest, ChebyshevTensor) {
  const auto g = CandidateGrid::chebyshev_tensor(4);
  EXPECT_EQ(g.points.size(), 25u * 25u * 24u);
  EXPECT_NEAR(g.points.front().thetas[0], 0.5 * oracle::pi * (1 - std::cos(oracle::pi / 50)), 1e-15);
  EXPECT_NEAR(g.points.front().phi, -oracle::pi + oracle::pi / 24, 1e-15);
  for (const auto& p : g.points) {
    EXPECT_GT(p.thetas[0], 0.0);
    EXPECT_LT(p.thetas[1], oracle::pi);
  }
}

TEST(DOptimalSearch, GroupOneReachesTheProductDesignValue) {
  const SymmetrizedModel model(builtin_table(PointGroup::pg1));
  const auto res = d_optimal_search(model, CandidateGrid::chebyshev_tensor(4), 1000000, 1e-6);
  EXPECT_LE(res.kw_ratio, 1.0 + 1e-6);
  for (std::size_t i = 1; i < res.log_det_history.size(); ++i)
    EXPECT_GE(res.log_det_history[i], res.log_det_history[i - 1] - 1e-12) << "iteration " << i;
  // the discrete design attains the continuous D value 1/(2 pi^2), so the grid optimum cannot beat it
  EXPECT_LE(res.d_value, 1.0 / (2 * oracle::pi * oracle::pi) * (1 + 1e-12));
  EXPECT_NEAR(d_efficiency(optimal_product_design(4, 4), model, res), 1.0, 1e-6);
  EXPECT_NEAR(std::exp(res.log_det / 11.0), res.d_value, 1e-15);
  EXPECT_NEAR(phi_p(info_matrix(res.design, model), SelectionMatrix::identity(11), 0.0), res.d_value, 1e-10);
}

TEST(DOptimalSearch, ReportsNonConvergence) {
  const SymmetrizedModel model(builtin_table(PointGroup::pg2));
  try {
    d_optimal_search(model, CandidateGrid::chebyshev_tensor(4, 9, 8), 5, 1e-9);
    FAIL() << "search claimed convergence after 5 iterations";
  } catch (const SearchNotConverged& e) {
    EXPECT_GT(e.kw_gap(), 1e-9);
    EXPECT_EQ(e.best_weights().size(), 9u * 9u * 8u);
  }
  EXPECT_THROW(d_optimal_search(model, CandidateGrid{}), ParameterError);
}
