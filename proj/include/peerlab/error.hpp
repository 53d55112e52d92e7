#pragma once

#include <stdexcept>

namespace peerlab {

// Base type for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };       // tensor dimension mismatch
struct LayoutError : Error { using Error::Error; };      // parameter layout mismatch
struct RangeError : Error { using Error::Error; };       // scalar argument out of range
struct DataError : Error { using Error::Error; };        // dataset / label contract violations
struct NumericError : Error { using Error::Error; };     // degenerate numeric input
struct ParseError : Error { using Error::Error; };       // checkpoint / CSV / config file syntax
struct ConfigError : Error { using Error::Error; };      // invalid run configuration
struct StaleCacheError : Error { using Error::Error; };  // backward called with mismatched cache

}  // namespace peerlab
