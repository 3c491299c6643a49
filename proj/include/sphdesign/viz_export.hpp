#ifndef SPHDESIGN_VIZ_EXPORT_HPP
#define SPHDESIGN_VIZ_EXPORT_HPP

// Disk projection of S_4 hyperangles and CSV texture maps for plotting.
//
//   R(t1,t2) = (3/2)^(1/3) (t1 - sin t1 cos t1)^(1/3) sqrt(2 (1 - |cos t2|))
//   (x1, x2) = (R cos phi, R sin phi)

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "harmonics.hpp"
#include "special.hpp"

namespace sphdesign {

struct DiskPoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline double disk_radius(double theta1, double theta2) {
  detail::require(theta1 >= 0.0 && theta1 <= pi && theta2 >= 0.0 && theta2 <= pi, "disk_radius: polar angle outside [0,pi]");
  const double a = std::max(0.0, theta1 - std::sin(theta1) * std::cos(theta1));
  return std::cbrt(1.5) * std::cbrt(a) * std::sqrt(2.0 * (1.0 - std::abs(std::cos(theta2))));
}

inline DiskPoint disk_projection(double theta1, double theta2, double phi) {
  detail::require(phi >= -pi && phi <= pi, "disk_projection: azimuth outside [-pi,pi]");
  const double r = disk_radius(theta1, theta2);
  const auto sc = exact_sincos(phi);
  return {r * sc.cos, r * sc.sin};
}

struct TextureRow {
  double slice_theta1;
  double theta2;
  double phi;
  double x1;
  double x2;
  double value;
};

//! Panel slices (2k-1) pi / 48, k = 1..6.
inline std::vector<double> default_texture_slices() {
  std::vector<double> s;
  for (int k = 1; k <= 6; ++k) s.push_back((2.0 * k - 1.0) * pi / 48.0);
  return s;
}

//! Samples `fn` on each slice over theta2 in [0, pi/2] (n_theta2 points) and
//! phi in [-pi, pi] (n_phi points), both with endpoints.
inline std::vector<TextureRow> texture_map(const std::function<double(const AngleVector&)>& fn,
                                           const std::vector<double>& slices, int n_theta2 = 25, int n_phi = 49) {
  detail::require(n_theta2 >= 2 && n_phi >= 2, "texture_map: need at least 2 points per axis");
  for (double s : slices) detail::require(s >= 0.0 && s <= pi, "texture_map: slice outside [0,pi]");
  std::vector<TextureRow> rows;
  rows.reserve(slices.size() * static_cast<std::size_t>(n_theta2 * n_phi));
  for (double t1 : slices)
    for (int i = 0; i < n_theta2; ++i) {
      const double t2 = i == n_theta2 - 1 ? 0.5 * pi : 0.5 * pi * i / (n_theta2 - 1);
      for (int j = 0; j < n_phi; ++j) {
        const double ph = j == n_phi - 1 ? pi : -pi + 2.0 * pi * j / (n_phi - 1);
        const auto p = disk_projection(t1, t2, ph);
        rows.push_back({t1, t2, ph, p.x1, p.x2, fn(AngleVector{{t1, t2}, ph})});
      }
    }
  return rows;
}

namespace detail {

inline void put_double(std::ostream& os, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  os.write(buf, res.ptr - buf);
}

}  // namespace detail

inline constexpr const char* texture_csv_header = "slice_theta1,theta2,phi,x1,x2,value";

//! Locale-independent CSV, 17 significant digits, LF line endings.
inline void write_texture_csv(std::ostream& os, const std::vector<TextureRow>& rows) {
  os << texture_csv_header << '\n';
  for (const auto& r : rows) {
    const double v[] = {r.slice_theta1, r.theta2, r.phi, r.x1, r.x2, r.value};
    for (int i = 0; i < 6; ++i) {
      if (i) os << ',';
      detail::put_double(os, v[i]);
    }
    os << '\n';
  }
}

}  // namespace sphdesign

#endif
