// Acceptance run: one PASS/FAIL line per criterion. `--only N` runs a single criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <sphdesign/sphdesign.hpp>

using namespace sphdesign;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

// 1
Outcome discrete_identity() {
  const auto info = info_matrix(optimal_product_design(4, 4, 5, 9, -pi), HarmonicBasis(4, 4));
  const double err = max_abs(info.matrix() - Eigen::MatrixXd::Identity(55, 55) / (2 * pi * pi));
  return {err <= 1e-10, "max |M - I/(2 pi^2)| = " + num(err)};
}

// 2
Outcome example_marginals() {
  const auto des = optimal_product_design(4, 4);
  const double s70 = std::sqrt(70.0);
  const double x1 = std::sqrt((35 - 2 * s70) / 7) / 3, x2 = std::sqrt((35 + 2 * s70) / 7) / 3;
  const std::vector<double> n1{pi / 6, pi / 3, pi / 2, 2 * pi / 3, 5 * pi / 6};
  const std::vector<double> w1{1.0 / 12, 0.25, 1.0 / 3, 0.25, 1.0 / 12};
  const std::vector<double> n2{std::acos(x2), std::acos(x1), pi / 2, std::acos(-x1), std::acos(-x2)};
  const double wa = (322 - 13 * s70) / 1800, wb = (322 + 13 * s70) / 1800;
  const std::vector<double> w2{wa, wb, 64.0 / 225, wb, wa};
  double err = 0.0;
  const auto cmp = [&](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
      err = INFINITY;
      return;
    }
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  };
  cmp(des.marginals()[0].support(), n1);
  cmp(des.marginals()[0].weights(), w1);
  cmp(des.marginals()[1].support(), n2);
  cmp(des.marginals()[1].weights(), w2);
  std::vector<double> nn, nw(9, 1.0 / 9);
  for (int j = 1; j <= 9; ++j) nn.push_back((2 * j - 9) * pi / 9);
  cmp(des.azimuthal().support(), nn);
  cmp(des.azimuthal().weights(), nw);
  return {err <= 1e-12, "max node/weight deviation " + num(err)};
}

// 3
Outcome comparison_table() {
  const HarmonicBasis b(4, 4);
  const auto designs = comparison_designs_example1();
  const auto opt_design = optimal_product_design(4, 4);
  const auto red = level_restricted_model(b, LevelSelection({4}));
  const auto k = SelectionMatrix::identity(25);
  const auto opt = info_matrix(opt_design, red);
  struct Row {
    const char* name;
    InformationMatrix info;
    double expect[3];
  };
  const Row rows[] = {{"grid", info_matrix(designs.grid, red), {40.64, 3.18, 11.27}},
                      {"equal-weight", info_matrix(designs.equal_weight, red), {91.05, 49.56, 54.58}}};
  const char* crits[] = {"D", "E", "phi-es=5"};
  bool pass = true;
  std::string detail;
  for (const auto& r : rows)
    for (int c = 0; c < 3; ++c) {
      const double e = 100 * efficiency(r.info, opt, CriterionSpec::parse(crits[c]), k);
      pass = pass && std::abs(e - r.expect[c]) <= 0.01;
      detail += std::string(r.name) + " " + crits[c] + " " + num(e, 6) + "% (" + num(r.expect[c], 4) + "); ";
    }

  // informational: C_K with K = levels {0,4} in the full order-4 model
  const auto kk = selection_matrix(b, LevelSelection({0, 4}));
  const auto opt_full = info_matrix(opt_design, b);
  std::printf("  info: levels {0,4} in the full model: grid design rank %ld of 55, feasible for K: %s\n",
              static_cast<long>(info_matrix(designs.grid, b).rank()),
              std::isinf(phi_p(info_matrix(designs.grid, b), kk, 0.0)) ? "no" : "yes");
  const auto tilde_full = info_matrix(designs.equal_weight, b);
  std::printf("  info: levels {0,4} in the full model: equal-weight D %s%%, E %s%%, phi-es=26 %s%%\n",
              num(100 * efficiency(tilde_full, opt_full, CriterionSpec::d_optimality(), kk)).c_str(),
              num(100 * efficiency(tilde_full, opt_full, CriterionSpec::e_optimality(), kk)).c_str(),
              num(100 * efficiency(tilde_full, opt_full, CriterionSpec::phi_es(26), kk)).c_str());
  return {pass, "level-4 model: " + detail};
}

// 4
Outcome quadrature_suite() {
  double worst = 0.0;
  bool pass = true;
  for (double p : {0.0, 0.5, 1.0, 1.5})
    for (int r = 2; r <= 10; ++r) {
      const auto q = gauss_rule(p, r);
      pass = pass && verify_exactness(q, p, 2 * r - 1).exact;
      for (double res : node_polynomial_residuals(q.nodes, p, r - 1)) worst = std::max(worst, res);
    }
  return {pass && worst <= 1e-11, "exact to degree 2r-1: " + std::string(pass ? "yes" : "no") +
                                      ", max orthogonality residual " + num(worst)};
}

// 5
Outcome sum_rule() {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> th(0.0, pi), ph(-pi, pi);
  double worst = 0.0;
  for (int m : {4, 5}) {
    const HarmonicBasis b(m, 4);
    for (int rep = 0; rep < 100; ++rep) {
      AngleVector a;
      for (int i = 0; i < m - 2; ++i) a.thetas.push_back(th(rng));
      a.phi = ph(rng);
      const auto f = b(a);
      for (int lam = 0; lam <= 4; ++lam) {
        double s = 0.0;
        for (std::size_t i = 0; i < b.dimension(); ++i)
          if (b.level_of(i) == lam) s += f(static_cast<Eigen::Index>(i)) * f(static_cast<Eigen::Index>(i));
        worst = std::max(worst, std::abs(s - static_cast<double>(level_size(m, lam)) / omega_tilde(m)));
      }
    }
  }
  return {worst <= 1e-10, "max deviation " + num(worst)};
}

// 6
Outcome certificates() {
  const HarmonicBasis b(4, 4);
  const auto k = selection_matrix(b, LevelSelection({0, 4}));
  const auto opt = info_matrix(optimal_product_design(4, 4), b);
  const auto grid = info_matrix(comparison_designs_example1().grid, b);
  bool pass = true;
  std::string detail;
  for (double p : {0.0, -1.0}) {
    const auto c = equivalence_check_phi_p(opt, b, k, p);
    pass = pass && c.pass && c.gap() <= 1e-9;
    detail += "optimal phi_p(" + num(p) + ") gap " + num(c.gap()) + "; ";
    const auto g = equivalence_check_phi_p(grid, b, k, p);
    pass = pass && !g.pass;
    detail += std::string("grid ") + (g.pass ? "passes" : "fails") + (g.feasible ? "" : " (infeasible)") + "; ";
  }
  const auto ce = equivalence_check_phi_es(opt, b, k);
  pass = pass && ce.pass && ce.gap() <= 1e-9;
  const auto ge = equivalence_check_phi_es(grid, b, k);
  pass = pass && !ge.pass;
  detail += "optimal phi_Es gap " + num(ce.gap()) + "; grid phi_Es max/bound - 1 = " + num(ge.gap());
  return {pass, detail};
}

// 7
Outcome invariance() {
  double worst = 0.0;
  for (auto [m, d] : {std::pair{3, 2}, std::pair{4, 3}, std::pair{4, 4}, std::pair{5, 2}}) {
    const HarmonicBasis b(m, d);
    const Eigen::MatrixXd ref = info_matrix(optimal_product_design(m, d), b).matrix();
    for (int r = d + 1; r <= 2 * d; ++r)
      for (int t : {2 * d + 1, 2 * d + 2, 2 * d + 5})
        for (double frac : {0.0, 0.25, 0.5, 0.99}) {
          const double beta = -pi - frac * pi / t;
          worst = std::max(worst, max_abs(info_matrix(optimal_product_design(m, d, r, t, beta), b).matrix() - ref));
        }
  }
  return {worst <= 1e-10, "max deviation over r, t, beta " + num(worst)};
}

// 8
Outcome symmetrized() {
  bool pass = true;
  std::string detail;
  for (auto g : {PointGroup::pg1, PointGroup::pg2}) {
    const auto table = builtin_table(g);
    const auto rep = check_orthonormality(table);
    const SymmetrizedModel model(table);
    const auto info = symmetrized_info(model, optimal_product_design(4, 4));
    const auto n = info.dim();
    const double gram = max_abs(info.matrix() - Eigen::MatrixXd::Identity(n, n) / omega_tilde(4));
    const bool rows_ok = table.size() == (g == PointGroup::pg1 ? 11u : 7u);
    pass = pass && rows_ok && rep.ok(1e-12) && gram <= 1e-10;
    detail += "PG" + std::to_string(static_cast<int>(g)) + ": " + std::to_string(table.size()) + " rows, norm dev " +
              num(rep.max_norm_deviation) + ", cross " + num(rep.max_cross) + ", Gram residual " + num(gram) + "; ";
  }
  return {pass, detail};
}

// 9
Outcome d_efficiencies() {
  const auto grid = CandidateGrid::chebyshev_tensor(4);
  const auto designs = comparison_designs_example1();
  const auto opt = optimal_product_design(4, 4);

  const SymmetrizedModel pg2(builtin_table(PointGroup::pg2));
  const auto ref = d_optimal_search(pg2, grid, 1000000, 1e-5);
  const double e_opt = 100 * d_efficiency(opt, pg2, ref);
  const double e_grid = 100 * d_efficiency(designs.grid, pg2, ref);
  const double e_eq = 100 * d_efficiency(designs.equal_weight, pg2, ref);
  std::printf("  info: PG2 reference D value %s after %d iterations, KW gap %s\n", num(ref.d_value, 10).c_str(),
              ref.iterations, num(ref.kw_ratio - 1.0).c_str());
  std::printf("  info: ratios grid/optimal %s, equal-weight/optimal %s\n", num(e_grid / e_opt).c_str(),
              num(e_eq / e_opt).c_str());
  const bool pg2_ok = std::abs(e_opt - 81.0) <= 1.0 && std::abs(e_grid - 59.38) <= 1.0 && std::abs(e_eq - 74.59) <= 1.0;

  const SymmetrizedModel pg1(builtin_table(PointGroup::pg1));
  const auto info1 = symmetrized_info(pg1, opt);
  const auto cert = equivalence_check_phi_p(info1, pg1, SelectionMatrix::identity(info1.dim()), 0.0);
  const auto ref1 = d_optimal_search(pg1, grid, 1000000, 1e-6);
  const double e1 = d_efficiency(opt, pg1, ref1);
  const bool pg1_ok = cert.feasible && cert.gap() <= 1e-6;

  return {pg2_ok && pg1_ok, "PG2 optimal " + num(e_opt, 5) + "% (81), grid " + num(e_grid, 5) + "% (59.38), equal-weight " +
                                num(e_eq, 5) + "% (74.59); PG1 KW gap " + num(cert.gap()) +
                                ", efficiency vs grid search " + num(e1, 10)};
}

// 10
Outcome projection() {
  const auto p = disk_projection(11 * pi / 48, pi / 4, pi);
  return {std::abs(p.x1 + 0.5323) <= 1e-3 && p.x2 == 0.0, "(" + num(p.x1, 8) + ", " + num(p.x2) + ")"};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"discrete-optimum identity", 1.0, discrete_identity},
      {"optimal marginals for m=4, d=4", 1.0, example_marginals},
      {"comparison-design efficiencies", 5.0, comparison_table},
      {"Gauss rule exactness", 2.0, quadrature_suite},
      {"sum rule", 2.0, sum_rule},
      {"equivalence certificates", 30.0, certificates},
      {"invariance in r and beta", 30.0, invariance},
      {"symmetrized harmonics", 5.0, symmetrized},
      {"point-group D-efficiencies", 120.0, d_efficiencies},
      {"disk projection", 1.0, projection},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  if (only < 0 || only > static_cast<int>(all.size())) {
    std::fprintf(stderr, "--only expects 1..%zu\n", all.size());
    return 2;
  }

  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= all[i].budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2zu %s: %s [%.2f s of %.0f s%s] %s\n", i + 1, all[i].name, pass ? "PASS" : "FAIL", secs,
                all[i].budget_s, in_time ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
