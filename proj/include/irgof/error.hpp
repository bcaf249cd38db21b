#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace irgof {

enum class ErrorKind {
  Resource,          // lattice or allocation cap exceeded
  InsufficientData,  // too few observations for the requested operation
  DegenerateFit,     // all residuals vanish, the test is undefined
  Domain,            // argument outside the mathematical domain
  EvaluationRange,   // density too small to form a score
  Numerical,         // quadrature or root finding failed
  Singularity,       // ill-conditioned information matrix
  Parse,             // malformed input file
  Range,             // input value outside its admissible range
  Config,            // invalid run configuration
  Io,                // file could not be opened or written
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace irgof
