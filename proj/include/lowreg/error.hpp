#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lowreg {

enum class ErrorKind {
  Domain,             // region / point outside where the data is defined
  Data,               // non-finite or malformed values
  Degeneracy,         // metric lost positive-definiteness
  Resolution,         // kernel scale not resolved by the grid
  Contract,           // operation called on data it does not accept
  Fit,                // too few samples for a rate or tail fit
  Convergence,        // iterative solver did not reach tolerance
  MaximumPrinciple,   // conformal factor left (0, inf)
  Argument,           // bad call arguments (empty battery, mismatched grids)
  Parameter,          // corpus constructor parameter out of range
  Config,             // experiment configuration invalid
  Io,                 // file read/write failure
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace lowreg
