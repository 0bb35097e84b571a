#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hpcwb {

/// Root of every error the workbench throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's contract (bad argument, bad size, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class AllocationFailure : public Error {
 public:
  using Error::Error;
};

/// The timed region is too short to be resolved by the clock.
class ClockResolutionError : public Error {
 public:
  using Error::Error;
};

/// Timing stayed below the clock resolution even after inner-loop scaling.
class RejectedTiming : public ClockResolutionError {
 public:
  using ClockResolutionError::ClockResolutionError;
};

/// Malformed file content. `field()` holds a JSON-pointer-like path.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A well-formed value violates a domain invariant. `rule()` names it.
class InvariantError : public Error {
 public:
  InvariantError(std::string rule, const std::string& what)
      : Error(rule + ": " + what), rule_(std::move(rule)) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

class UnknownLevel : public Error {
 public:
  using Error::Error;
};

class UnknownPrecision : public Error {
 public:
  using Error::Error;
};

class MismatchedKernel : public Error {
 public:
  using Error::Error;
};

class NonPositiveTime : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A backend lacks a precision/layout variant. Never substituted silently.
class UnsupportedCombination : public Error {
 public:
  using Error::Error;
};

class InvalidSize : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class EmptyDimension : public Error {
 public:
  using Error::Error;
};

/// Results were assessed against a different machine model than the one given.
class ModelMismatch : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace detail

}  // namespace hpcwb
