#ifndef SPHDESIGN_DESIGN_IO_HPP
#define SPHDESIGN_DESIGN_IO_HPP

// JSON files for designs.
//
//   product:       {"m", "d", "marginals": [{"axis", "nodes", "weights"}], "azimuthal": {"t", "beta"}}
//   support point: {"points": [[theta..., phi]], "weights": [...]}
//
// Doubles are written in shortest round-trip form, so re-reading is bit-exact.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "design.hpp"
#include "errors.hpp"

namespace sphdesign {

using DesignVariant = std::variant<ProductDesign, SupportPointDesign>;

struct LoadedDesign {
  DesignVariant design;
  std::optional<int> order;  // "d" when present

  int sphere_dim() const {
    return std::visit([](const auto& d) { return d.sphere_dim(); }, design);
  }
  std::size_t support_size() const {
    return std::visit([](const auto& d) { return d.support_size(); }, design);
  }
};

inline nlohmann::json to_json(const ProductDesign& design, int d) {
  nlohmann::json j;
  j["m"] = design.sphere_dim();
  j["d"] = d;
  j["marginals"] = nlohmann::json::array();
  for (std::size_t i = 0; i < design.marginals().size(); ++i) {
    const auto& mg = design.marginals()[i];
    j["marginals"].push_back({{"axis", i + 1}, {"nodes", mg.support()}, {"weights", mg.weights()}});
  }
  j["azimuthal"] = {{"t", design.azimuth().t}, {"beta", design.azimuth().beta}};
  return j;
}

inline nlohmann::json to_json(const SupportPointDesign& design) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& a : design.points()) {
    std::vector<double> row = a.thetas;
    row.push_back(a.phi);
    pts.push_back(row);
  }
  return {{"points", pts}, {"weights", design.weights()}};
}

namespace detail {

template <class T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParameterError(std::string("design JSON: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParameterError(std::string("design JSON: field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline LoadedDesign design_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("design JSON: top level must be an object");
  if (j.contains("marginals")) {
    const int m = detail::field<int>(j, "m");
    const int d = detail::field<int>(j, "d");
    const auto& ms = j.at("marginals");
    detail::require(ms.is_array(), "design JSON: 'marginals' must be an array");
    std::vector<MarginalDesign> marginals;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const int axis = detail::field<int>(ms[i], "axis");
      detail::require(axis == static_cast<int>(i) + 1, "design JSON: marginals must be listed in axis order 1..m-2");
      marginals.emplace_back(detail::field<std::vector<double>>(ms[i], "nodes"),
                             detail::field<std::vector<double>>(ms[i], "weights"), Axis::theta);
    }
    if (!j.contains("azimuthal")) throw ParameterError("design JSON: missing field 'azimuthal'");
    const auto& az = j.at("azimuthal");
    UniformAzimuth nu{detail::field<int>(az, "t"), detail::field<double>(az, "beta")};
    detail::require(d >= 0, "design JSON: d must be >= 0");
    return {ProductDesign(m, std::move(marginals), nu), d};
  }
  if (j.contains("points")) {
    const auto rows = detail::field<std::vector<std::vector<double>>>(j, "points");
    std::vector<AngleVector> pts;
    for (const auto& r : rows) {
      detail::require(r.size() >= 3, "design JSON: each point needs m-2 >= 1 polar angles and an azimuth");
      pts.push_back(AngleVector{std::vector<double>(r.begin(), r.end() - 1), r.back()});
      detail::require(pts.back().sphere_dim() == pts.front().sphere_dim(), "design JSON: points of different dimension");
    }
    std::optional<int> d;
    if (j.contains("d")) d = detail::field<int>(j, "d");
    return {SupportPointDesign(std::move(pts), detail::field<std::vector<double>>(j, "weights")), d};
  }
  throw ParameterError("design JSON: expected either 'marginals' (product design) or 'points' (support-point design)");
}

inline LoadedDesign parse_design(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(std::string("design JSON: ") + e.what());
  }
  return design_from_json(j);
}

inline LoadedDesign load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open design file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_design(ss.str());
}

}  // namespace sphdesign

#endif
