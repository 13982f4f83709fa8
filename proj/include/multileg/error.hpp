#pragma once

#include <stdexcept>
#include <string>

namespace multileg {

enum class errc {
  invalid_argument,   // malformed model/config/file input
  no_support,         // vertical balance unreachable (toppling/malformed input)
  singular_support,   // collinear contacts: support 3x3 is rank deficient
  degenerate_tilt,    // COM on the contact point/line while under-supported
  singular_balance,   // planar balance 3x3 rank deficient
  zero_velocity,      // exact Coulomb force undefined at rest
  no_convergence,     // iteration cap hit
  degenerate_fit,     // all-zero predictions in the scale fit
  insufficient_data,  // fit lacks usable samples
  length_mismatch,    // paired sequences of different length
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::no_support: return "NoSupport";
    case errc::singular_support: return "SingularSupport";
    case errc::degenerate_tilt: return "DegenerateTilt";
    case errc::singular_balance: return "SingularBalance";
    case errc::zero_velocity: return "ZeroVelocity";
    case errc::no_convergence: return "NoConvergence";
    case errc::degenerate_fit: return "DegenerateFit";
    case errc::insufficient_data: return "InsufficientData";
    case errc::length_mismatch: return "LengthMismatch";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace multileg
