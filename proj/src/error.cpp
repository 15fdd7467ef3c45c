#include "pgal/error.hpp"

namespace pgal {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidResolution: return "InvalidResolution";
    case Errc::UnderResolved: return "UnderResolved";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::MissingPartials: return "MissingPartials";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NotCompatible: return "NotCompatible";
    case Errc::NotLinearDiffusion: return "NotLinearDiffusion";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::Blowup: return "Blowup";
    case Errc::EnergyViolation: return "EnergyViolation";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace pgal
