#pragma once

#include <stdexcept>
#include <string>

namespace rieszlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two lattice elements live over different index sets.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operation left the extended positive cone (e.g. negating +inf) or an
/// operator was applied outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A norm was requested of an element carrying +inf entries.
class InfiniteNormError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A stated precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter is out of range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A set with infinite measure was used where a finite one is required.
class InfiniteMeasureError : public Error {
 public:
  using Error::Error;
};

/// No certified defining sequence is available for an integrand.
class NotIntegrableError : public Error {
 public:
  using Error::Error;
};

/// An explicit filter family has an empty intersection.
class InvalidFilterError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration does not match its schema. `path()` names the
/// offending key as a JSON pointer.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A named fixture does not exist in the registry.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A report file could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rieszlab
