#pragma once

#include <stdexcept>
#include <string>

namespace pgal {

enum class Errc {
  InvalidResolution,
  UnderResolved,
  LengthMismatch,
  MissingPartials,
  QuadratureFailure,
  ShapeMismatch,
  NotCompatible,
  NotLinearDiffusion,
  SingularSystem,
  Blowup,
  EnergyViolation,
  ConfigError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Nonfinite state detected during time stepping.
class BlowupError : public Error {
 public:
  BlowupError(double t, long sample_index, const std::string& what)
      : Error(Errc::Blowup, what), time_(t), sample_index_(sample_index) {}
  double time() const noexcept { return time_; }
  /// -1 for deterministic runs.
  long sample_index() const noexcept { return sample_index_; }

 private:
  double time_;
  long sample_index_;
};

}  // namespace pgal
