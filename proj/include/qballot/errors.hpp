#pragma once

#include <stdexcept>
#include <string>

namespace qballot {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Occupation outside a mode cutoff, or a Hilbert space above the dimension limit.
class CutoffError : public Error {
 public:
  using Error::Error;
};

// Unknown site label, wrong site kind, or states on different layouts.
class LayoutError : public Error {
 public:
  using Error::Error;
};

// Superposition or projection with zero norm.
class DegenerateStateError : public Error {
 public:
  using Error::Error;
};

// Measurement basis that is not orthonormal.
class BasisError : public Error {
 public:
  using Error::Error;
};

// Strict measurement whose basis misses a non-negligible part of the state.
class IncompleteBasisError : public Error {
 public:
  using Error::Error;
};

// Protocol rule broken by the caller (duplicate voter, tally before transfer, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Self-check found a broken physical invariant (privacy leak, entangled return).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Scenario configuration rejected; `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qballot
