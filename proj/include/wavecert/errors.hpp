#pragma once

#include <stdexcept>
#include <string>

namespace wavecert {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonIntegrableTail : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct DivergentTail : Error { using Error::Error; };
struct InvalidBracket : Error { using Error::Error; };
struct OrderUnavailable : Error { using Error::Error; };
struct InvalidDilation : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct DegenerateProfile : Error { using Error::Error; };
struct DecayViolation : Error { using Error::Error; };
struct HypothesisFailure : Error { using Error::Error; };
struct InvalidB : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace wavecert
