#pragma once

#include <stdexcept>
#include <string>

namespace hdts {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : Error { using Error::Error; };
struct InvalidBlockSize : Error { using Error::Error; };
struct LagTooLarge : Error { using Error::Error; };
struct EmptyDistribution : Error { using Error::Error; };
struct DegenerateVariance : Error { using Error::Error; };
struct InvalidBandwidth : Error { using Error::Error; };
struct MissingTarget : Error { using Error::Error; };
struct TruncationTooLarge : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace hdts
