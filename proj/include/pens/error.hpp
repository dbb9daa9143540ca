#pragma once

#include <stdexcept>
#include <string>

namespace pens {

enum class ErrorKind {
  invalid_argument,
  zero_frequency_singularity,
  symmetry_violation,
  non_finite,
  vacuum,
  cfl_violation,
  config,
  io,
  format,
  contraction,
  divergent_integral,
  window,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::zero_frequency_singularity: return "zero-frequency-singularity";
    case ErrorKind::symmetry_violation: return "symmetry-violation";
    case ErrorKind::non_finite: return "non-finite";
    case ErrorKind::vacuum: return "vacuum";
    case ErrorKind::cfl_violation: return "cfl-violation";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::contraction: return "contraction";
    case ErrorKind::divergent_integral: return "divergent-integral";
    case ErrorKind::window: return "window";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so the CLI can print a
// single machine-parsable line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pens
