#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hug {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroRowError : public Error {
 public:
  explicit ZeroRowError(std::int64_t row)
      : Error("row " + std::to_string(row) + " has near-zero norm"), row(row) {}
  std::int64_t row;
};

class CoincidentPointsError : public Error {
 public:
  CoincidentPointsError(std::int64_t i, std::int64_t j)
      : Error("points " + std::to_string(i) + " and " + std::to_string(j) +
              " coincide; kernel is singular"),
        i(i),
        j(j) {}
  std::int64_t i, j;
};

class SingularGramError : public Error {
 public:
  explicit SingularGramError(std::int64_t pivot_index)
      : Error("gram matrix factorization pivot " + std::to_string(pivot_index) +
              " below 1e-12"),
        pivot_index(pivot_index) {}
  std::int64_t pivot_index;
};

class DegenerateMeanError : public Error {
 public:
  explicit DegenerateMeanError(std::int64_t class_index)
      : Error("class " + std::to_string(class_index) +
              " has a degenerate (near-zero) mean"),
        class_index(class_index) {}
  std::int64_t class_index;
};

class WrongCountError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(std::int64_t iteration)
      : Error("non-finite value produced at iteration " +
              std::to_string(iteration)),
        iteration(iteration) {}
  std::int64_t iteration;
};

class EmptyClassError : public Error {
 public:
  explicit EmptyClassError(std::int64_t class_index)
      : Error("class " + std::to_string(class_index) + " has no samples"),
        class_index(class_index) {}
  std::int64_t class_index;
};

class DimensionTooSmallError : public Error {
 public:
  DimensionTooSmallError(std::int64_t points, std::int64_t dim)
      : Error("a regular simplex of " + std::to_string(points) +
              " points does not fit in dimension " + std::to_string(dim)),
        points(points),
        dim(dim) {}
  std::int64_t points, dim;
};

class SingularCayleyError : public Error {
 public:
  SingularCayleyError() : Error("Cayley factor (I + A) is numerically singular") {}
};

class DivergentError : public Error {
 public:
  DivergentError(double s, std::int64_t d)
      : Error("continuous Riesz energy diverges for s >= d-1 (s=" +
              std::to_string(s) + ", d=" + std::to_string(d) + ")") {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class SchemaVersionError : public Error {
 public:
  SchemaVersionError(std::int64_t found, std::int64_t supported)
      : Error("file schema version " + std::to_string(found) +
              " is not supported (expected " + std::to_string(supported) + ")"),
        found(found),
        supported(supported) {}
  std::int64_t found, supported;
};

}  // namespace hug
