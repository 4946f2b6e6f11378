#pragma once

#include <stdexcept>
#include <string>

namespace fvdwr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input stream or file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Mesh connectivity is not an admissible triangulation.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// Precondition on mesh/diagram geometry violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Voronoi construction requested on a mesh with a non-self-centered element.
class NotSelfCenteredError : public ValidationError {
 public:
  explicit NotSelfCenteredError(int element)
      : ValidationError("element " + std::to_string(element) +
                        " is not self-centered; Voronoi diagram unavailable"),
        element_(element) {}
  int element() const { return element_; }

 private:
  int element_;
};

// Bad run configuration (unknown key, schema violation, unknown catalog name).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical failure in a solver.
class SolverError : public Error {
 public:
  enum class Kind { max_iterations, singular_jacobian, line_search_stall, linear_residual };

  SolverError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Effectivity undefined: the true goal error is numerically zero.
class ZeroTrueError : public Error {
 public:
  ZeroTrueError() : Error("true goal error below 1e-14; effectivity undefined") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fvdwr
