#pragma once

#include <stdexcept>
#include <string>

namespace gran {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// The iterative SVD backend failed to converge.
class SvdError : public Error {
public:
  SvdError(const std::string& what, int iterations)
      : Error(what), iterations(iterations) {}
  int iterations;  // -1 when the backend does not report a count
};

/// A malformed cell or row in a delimited text file.
class ParseError : public Error {
public:
  ParseError(const std::string& what, long row, long col)
      : Error(what), row(row), col(col) {}
  long row;  // 1-based data row
  long col;  // 1-based column
};

/// A cluster whose membership weight sum collapsed to zero.
class DegenerateClusterError : public Error {
public:
  DegenerateClusterError(const std::string& what, int cluster)
      : Error(what), cluster(cluster) {}
  int cluster;
};

/// Incompatible matrix/vector shapes.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

/// Invalid argument values (bad fold counts, m <= 1, ...).
class ArgumentError : public Error {
public:
  explicit ArgumentError(const std::string& what) : Error(what) {}
};

}  // namespace gran
