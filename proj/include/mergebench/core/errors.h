#pragma once

#include <stdexcept>
#include <string>

namespace mergebench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed file or response. raw() holds the offending text when available.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::string raw = {})
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// An ego planner threw, returned non-finite controls, or overran its budget.
class PlannerFault : public Error {
 public:
  using Error::Error;
};

}  // namespace mergebench
