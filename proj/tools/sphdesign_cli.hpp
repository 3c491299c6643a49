#ifndef SPHDESIGN_TOOLS_CLI_HPP
#define SPHDESIGN_TOOLS_CLI_HPP

// Command-line front end. run() never exits the process, so tests can drive it
// in-process; exit codes: 0 success, 2 validation, 3 infeasible, 4 numeric.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <sphdesign/sphdesign.hpp>

namespace sphdesign::cli {

enum ExitCode { ok = 0, validation = 2, infeasible = 3, numeric = 4 };

namespace detail {

using nlohmann::json;

inline std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot write '" + path + "'");
  f << text;
}

//! "optimal" (needs m and d) or a design file.
inline LoadedDesign resolve_design(const std::string& spec, std::optional<int> m, std::optional<int> d) {
  if (spec == "optimal") {
    if (!m || !d) throw ParameterError("'optimal' design requires --m and --d");
    return {optimal_product_design(*m, *d), *d};
  }
  return load_design(spec);
}

inline int order_of(const LoadedDesign& ld, std::optional<int> d_flag) {
  if (d_flag) return *d_flag;
  if (ld.order) return *ld.order;
  throw ParameterError("the design file has no order 'd'; pass --d");
}

template <FeatureMap Model>
InformationMatrix info_of(const LoadedDesign& ld, const Model& model) {
  return std::visit([&](const auto& des) { return info_matrix(des, model); }, ld.design);
}

//! Regression model plus the selection used by the criteria.
struct ModelChoice {
  HarmonicBasis basis;
  std::optional<ProjectedBasis> reduced;
  SelectionMatrix k;
  std::string name;

  template <class F>
  decltype(auto) visit(F&& f) const {
    if (reduced) return f(*reduced);
    return f(basis);
  }
};

inline ModelChoice make_model(int m, int d, const std::string& kind, const std::vector<int>& levels_in) {
  HarmonicBasis basis(m, d);
  const auto levels = levels_in.empty() ? LevelSelection::all(d) : LevelSelection(levels_in);
  if (kind == "full") {
    auto k = selection_matrix(basis, levels);
    return {std::move(basis), std::nullopt, std::move(k), "full"};
  }
  if (kind == "reduced") {
    auto red = level_restricted_model(basis, levels);
    auto k = SelectionMatrix::identity(static_cast<Eigen::Index>(red.dimension()));
    return {std::move(basis), std::move(red), std::move(k), "reduced"};
  }
  throw ParameterError("--model must be 'full' or 'reduced'");
}

inline std::string levels_string(const std::vector<int>& levels, int d) {
  std::string s;
  const auto v = levels.empty() ? LevelSelection::all(d).levels() : levels;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

inline json certificate_json(const Certificate& c) {
  json a = json::array();
  for (double t : c.argmax.thetas) a.push_back(t);
  a.push_back(c.argmax.phi);
  json j{{"pass", c.pass}, {"feasible", c.feasible}, {"max_directional", c.max_directional}, {"bound", c.bound}};
  if (c.feasible) {
    j["ratio_minus_one"] = c.gap();
    j["argmax"] = a;
  } else {
    j["max_directional"] = nullptr;
    j["note"] = c.note;
  }
  return j;
}

inline std::string table_csv(const SymmetrizedBasisTable& t) {
  std::ostringstream os;
  os << "group,eta,lambda,mu1,mu2,coeff_num,coeff_den,sign\n";
  for (const auto& row : t.rows())
    for (const auto& term : row.terms)
      os << t.group() << ',' << row.eta << ',' << row.lambda << ',' << term.index.chain.at(0) << ',' << term.index.last
         << ',' << term.coeff.num << ',' << term.coeff.den << ',' << term.coeff.sign << '\n';
  return os.str();
}

}  // namespace detail

//! Runs the command line `args` (without the program name).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using detail::json;
  CLI::App app{"Optimal designs for hyperspherical-harmonic regression"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable summaries");

  // design
  auto* c_design = app.add_subcommand("design", "write the discrete optimal product design as JSON");
  int m = 0, d = 0, r = -1, t = -1;
  double beta = -pi;
  std::string out_path;
  c_design->add_option("--m", m, "sphere dimension (>= 3)")->required();
  c_design->add_option("--d", d, "order of the expansion")->required();
  c_design->add_option("--r", r, "polar nodes per axis, d+1..2d (default d+1)");
  c_design->add_option("--t", t, "azimuth points, >= 2d+1 (default 2d+1)");
  c_design->add_option("--beta", beta, "azimuth offset in radians, (-(t+1)pi/t, -pi]");
  c_design->add_option("--out", out_path, "output file (default stdout)");

  // shared design/model flags
  std::string design_spec, reference_spec = "optimal", criterion = "D", model_kind = "full";
  std::optional<int> m_flag, d_flag;
  std::vector<int> levels;
  auto add_design_flags = [&](CLI::App* c) {
    c->add_option("--design", design_spec, "design JSON file or 'optimal'")->required();
    c->add_option("--m", m_flag, "sphere dimension (for 'optimal')");
    c->add_option("--d", d_flag, "order of the model (overrides the file)");
    c->add_option("--levels", levels, "selected resolution levels, e.g. 0,4 (default all)")->delimiter(',');
    c->add_option("--model", model_kind, "full | reduced (regressors of the selected levels only)");
  };

  auto* c_info = app.add_subcommand("info", "information matrix dump and summary");
  add_design_flags(c_info);
  c_info->add_option("--out", out_path, "write the matrix as CSV");

  auto* c_eff = app.add_subcommand("efficiency", "criterion efficiency against a reference design");
  add_design_flags(c_eff);
  c_eff->add_option("--reference", reference_spec, "reference design file or 'optimal' (default)");
  c_eff->add_option("--criterion", criterion, "D | A | E | phi-p=<p> | phi-es=<s>");

  auto* c_cert = app.add_subcommand("certify", "equivalence-theorem certificate");
  add_design_flags(c_cert);
  int grid_n = 61;
  c_cert->add_option("--criterion", criterion, "D | A | E | phi-p=<p> | phi-es=<s>");
  c_cert->add_option("--grid", grid_n, "points per polar axis (azimuth uses 2n-1)");

  auto* c_symm = app.add_subcommand("symm", "symmetrized harmonics of point groups 1 and 2");
  int group = 1, max_iter = 1000000, n_theta = 25, n_phi = 24;
  double tol = 1e-6;
  std::string action = "table", table_path;
  c_symm->add_option("--group", group, "crystallographic point group (1 or 2)");
  c_symm->add_option("--action", action, "table | ortho-check | d-opt | efficiency");
  c_symm->add_option("--design", design_spec, "design for 'efficiency' (default: optimal m=4, d=4)");
  c_symm->add_option("--table", table_path, "coefficient table CSV instead of the built-in one");
  c_symm->add_option("--tol", tol, "KW tolerance of the D-optimal search");
  c_symm->add_option("--max-iter", max_iter, "iteration limit of the D-optimal search");
  c_symm->add_option("--n-theta", n_theta, "candidate points per polar axis");
  c_symm->add_option("--n-phi", n_phi, "candidate azimuths");
  c_symm->add_option("--out", out_path, "write the found design (d-opt) as JSON");

  auto* c_tex = app.add_subcommand("texture", "disk-projection texture map as CSV");
  std::string eta_spec = "4:2";
  std::vector<int> harmonic;
  std::vector<double> slices = default_texture_slices();
  std::vector<int> grid2{25, 49};
  bool no_slices = false;
  c_tex->add_option("--group", group, "point group of the symmetrized harmonic");
  c_tex->add_option("--eta", eta_spec, "symmetrized harmonic as lambda:eta (default 4:2)");
  c_tex->add_option("--harmonic", harmonic, "raw harmonic lambda,mu1,mu2 instead")->delimiter(',')->expected(3);
  c_tex->add_option("--slices", slices, "theta1 slices in radians")->delimiter(',');
  c_tex->add_flag("--no-slices", no_slices, "empty slice list (header only)");
  c_tex->add_option("--grid", grid2, "n_theta2,n_phi")->delimiter(',')->expected(2);
  c_tex->add_option("--out", out_path, "output file (default stdout)");

  for (auto* c : {c_design, c_info, c_eff, c_cert, c_symm, c_tex}) c->add_flag("--json", as_json, "machine-readable summaries");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  }

  try {
    if (c_design->parsed()) {
      const auto des = optimal_product_design(m, d, r < 0 ? d + 1 : r, t < 0 ? 2 * d + 1 : t, beta);
      detail::write_text(out_path, to_json(des, d).dump(2) + "\n", out);
      return ok;
    }

    if (c_info->parsed()) {
      const auto ld = detail::resolve_design(design_spec, m_flag, d_flag);
      const int dd = detail::order_of(ld, d_flag);
      const auto mc = detail::make_model(ld.sphere_dim(), dd, model_kind, levels);
      const auto info = mc.visit([&](const auto& f) { return detail::info_of(ld, f); });
      const auto ev = info.eigenvalues();
      const double target = 1.0 / omega_tilde(ld.sphere_dim());
      const double resid =
          (info.matrix() - target * Eigen::MatrixXd::Identity(info.dim(), info.dim())).cwiseAbs().maxCoeff();
      if (!out_path.empty()) {
        std::ostringstream os;
        for (Eigen::Index i = 0; i < info.dim(); ++i) {
          for (Eigen::Index j = 0; j < info.dim(); ++j) os << (j ? "," : "") << detail::fmt(info.matrix()(i, j));
          os << '\n';
        }
        detail::write_text(out_path, os.str(), out);
      }
      if (as_json) {
        out << json{{"m", ld.sphere_dim()}, {"d", dd},           {"model", mc.name},          {"dimension", info.dim()},
                    {"support_size", ld.support_size()},         {"rank", info.rank()},       {"eig_min", ev(0)},
                    {"eig_max", ev(ev.size() - 1)},              {"asymmetry", info.asymmetry()},
                    {"identity_residual", resid}}
                   .dump(2)
            << '\n';
      } else {
        out << "m " << ld.sphere_dim() << ", d " << dd << ", model " << mc.name << ", dimension " << info.dim()
            << ", support " << ld.support_size() << '\n'
            << "rank " << info.rank() << " of " << info.dim() << '\n'
            << "eigenvalues [" << detail::fmt(ev(0)) << ", " << detail::fmt(ev(ev.size() - 1)) << "]\n"
            << "max |M - I/Omega| " << detail::fmt(resid) << '\n';
      }
      return ok;
    }

    if (c_eff->parsed()) {
      const auto ld = detail::resolve_design(design_spec, m_flag, d_flag);
      const int dd = detail::order_of(ld, d_flag);
      const auto ref = detail::resolve_design(reference_spec, ld.sphere_dim(), dd);
      sphdesign::detail::require(ref.sphere_dim() == ld.sphere_dim(), "design and reference live on different spheres");
      const auto crit = CriterionSpec::parse(criterion);
      const auto mc = detail::make_model(ld.sphere_dim(), dd, model_kind, levels);
      const double eff = mc.visit([&](const auto& f) {
        return efficiency(detail::info_of(ld, f), detail::info_of(ref, f), crit, mc.k);
      });
      const auto lv = detail::levels_string(levels, dd);
      if (as_json) {
        out << json{{"design", design_spec}, {"reference", reference_spec}, {"criterion", crit.name()}, {"levels", lv},
                    {"model", mc.name},      {"efficiency", eff}}
                   .dump(2)
            << '\n';
      } else {
        out << "design,reference,criterion,levels,model,efficiency\n"
            << design_spec << ',' << reference_spec << ',' << crit.name() << ',' << lv << ',' << mc.name << ','
            << detail::fmt(eff) << '\n';
      }
      return ok;
    }

    if (c_cert->parsed()) {
      const auto ld = detail::resolve_design(design_spec, m_flag, d_flag);
      const int dd = detail::order_of(ld, d_flag);
      const auto crit = CriterionSpec::parse(criterion);
      const auto mc = detail::make_model(ld.sphere_dim(), dd, model_kind, levels);
      sphdesign::detail::require(grid_n >= 2, "--grid must be >= 2");
      EquivalenceGrid grid;
      grid.theta_points = grid_n;
      grid.phi_points = 2 * grid_n - 1;
      const auto cert = mc.visit([&](const auto& f) {
        const auto info = detail::info_of(ld, f);
        if (crit.is_phi_p()) return equivalence_check_phi_p(info, f, mc.k, crit.p(), grid);
        sphdesign::detail::require(crit.s() == mc.k.cols(),
                        "phi-es=" + std::to_string(crit.s()) + " does not match the " + std::to_string(mc.k.cols()) +
                            " selected coefficients");
        return equivalence_check_phi_es(info, f, mc.k, grid);
      });
      auto j = detail::certificate_json(cert);
      j["criterion"] = crit.name();
      j["levels"] = detail::levels_string(levels, dd);
      j["model"] = mc.name;
      out << j.dump(2) << '\n';
      return cert.feasible ? ok : infeasible;
    }

    if (c_symm->parsed()) {
      const auto table = table_path.empty() ? builtin_table(point_group(group)) : load_table_csv(table_path, group);
      const SymmetrizedModel model(table);
      if (action == "table") {
        out << detail::table_csv(table);
        return ok;
      }
      if (action == "ortho-check") {
        const auto rep = check_orthonormality(table);
        const auto quad = optimal_product_design(4, table.max_lambda());
        const auto info = symmetrized_info(model, quad);
        const auto n = info.dim();
        const double gram = (omega_tilde(4) * info.matrix() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
        const bool pass = rep.ok() && gram <= 1e-10;
        if (as_json) {
          out << json{{"group", group}, {"rows", table.size()}, {"max_norm_deviation", rep.max_norm_deviation},
                      {"max_cross", rep.max_cross}, {"gram_residual", gram}, {"pass", pass}}
                     .dump(2)
              << '\n';
        } else {
          out << "group " << group << ": " << table.size() << " rows\n"
              << "max | |row| - 1 | " << detail::fmt(rep.max_norm_deviation) << '\n'
              << "max |<row_a,row_b>| (equal lambda) " << detail::fmt(rep.max_cross) << '\n'
              << "max |Omega M - I| under exact quadrature " << detail::fmt(gram) << '\n'
              << (pass ? "PASS" : "FAIL") << '\n';
        }
        return ok;
      }
      if (action == "d-opt" || action == "efficiency") {
        const auto res = d_optimal_search(model, CandidateGrid::chebyshev_tensor(4, n_theta, n_phi), max_iter, tol);
        if (action == "d-opt") {
          if (!out_path.empty()) {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw ParameterError("cannot write '" + out_path + "'");
            f << to_json(res.design).dump(2) << '\n';
          }
          if (as_json) {
            out << json{{"group", group},
                        {"iterations", res.iterations},
                        {"d_value", res.d_value},
                        {"log_det", res.log_det},
                        {"kw_gap", res.kw_ratio - 1.0},
                        {"support_size", res.design.support_size()}}
                       .dump(2)
                << '\n';
          } else {
            out << "group " << group << ": D-optimal value " << detail::fmt(res.d_value) << " after " << res.iterations
                << " iterations, KW gap " << detail::fmt(res.kw_ratio - 1.0) << ", support "
                << res.design.support_size() << '\n';
          }
          return ok;
        }
        const auto ld = detail::resolve_design(design_spec.empty() ? "optimal" : design_spec, 4, 4);
        sphdesign::detail::require(ld.sphere_dim() == 4, "symmetrized models need a design on S_4");
        const double eff = std::visit([&](const auto& des) { return d_efficiency(des, model, res); }, ld.design);
        if (as_json) {
          out << json{{"group", group}, {"design", design_spec.empty() ? "optimal" : design_spec},
                      {"d_efficiency", eff}, {"reference_kw_gap", res.kw_ratio - 1.0}}
                     .dump(2)
              << '\n';
        } else {
          out << "group " << group << ": D-efficiency " << detail::fmt(eff) << " (reference KW gap "
              << detail::fmt(res.kw_ratio - 1.0) << ")\n";
        }
        return ok;
      }
      throw ParameterError("--action must be table, ortho-check, d-opt or efficiency");
    }

    if (c_tex->parsed()) {
      if (no_slices) slices.clear();
      std::function<double(const AngleVector&)> fn;
      if (!harmonic.empty()) {
        const MultiIndex idx{harmonic[0], {harmonic[1]}, harmonic[2]};
        validate_index(4, idx);
        fn = [idx](const AngleVector& a) { return eval_harmonic(4, idx, a); };
      } else {
        const auto colon = eta_spec.find(':');
        if (colon == std::string::npos) throw ParameterError("--eta must look like lambda:eta");
        int lam = 0, eta = 0;
        try {
          lam = std::stoi(eta_spec.substr(0, colon));
          eta = std::stoi(eta_spec.substr(colon + 1));
        } catch (const std::exception&) {
          throw ParameterError("--eta must look like lambda:eta");
        }
        const SymmetrizedModel model(builtin_table(point_group(group)));
        const auto row = static_cast<Eigen::Index>(model.table().find(lam, eta));
        fn = [model, row](const AngleVector& a) { return model(a)(row); };
      }
      std::ostringstream os;
      write_texture_csv(os, texture_map(fn, slices, grid2.at(0), grid2.at(1)));
      detail::write_text(out_path, os.str(), out);
      return ok;
    }
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  } catch (const InfeasibleDesign& e) {
    err << "infeasible: " << e.what() << '\n';
    return infeasible;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return numeric;
  }
  return validation;
}

}  // namespace sphdesign::cli

#endif
