#pragma once

#include <stdexcept>

namespace gps {

// Error taxonomy shared across the library. The CLI surfaces every one of
// these as a single "error: ..." line.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };  // shape / index mismatch
struct NumericError : Error { using Error::Error; };    // NaN/Inf or degenerate value
struct StateError : Error { using Error::Error; };      // misuse of tape / lifecycle
struct IoError : Error { using Error::Error; };         // missing or unreadable file
struct FormatError : Error { using Error::Error; };     // malformed file contents
struct ConfigError : Error { using Error::Error; };     // invalid configuration
struct VersionError : Error { using Error::Error; };    // checkpoint version mismatch

}  // namespace gps
