#pragma once

#include <stdexcept>
#include <string>

namespace kelly {

/// Raised for invalid model or strategy parameters.
class parameter_error : public std::invalid_argument {
public:
  explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a numerical routine (quadrature, root bracketing) fails to converge.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const char* message) {
  if (!condition) throw parameter_error(message);
}

}  // namespace detail
}  // namespace kelly
