#ifndef SPHDESIGN_ERRORS_HPP
#define SPHDESIGN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sphdesign {

//! Invalid argument: out-of-range parameter, malformed index, bad file content.
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

//! The design does not allow estimation of the selected coefficients
//! (range(K) is not contained in range(M)).
class InfeasibleDesign : public std::runtime_error {
public:
  explicit InfeasibleDesign(const std::string& what) : std::runtime_error(what) {}
};

//! A numerical procedure failed (eigen-solver, iteration limit, ...).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ParameterError(msg);
}

}  // namespace detail
}  // namespace sphdesign

#endif
