#pragma once

#include <stdexcept>
#include <string>

namespace shred {

/// Base class for every error raised by the library. Messages are stable and
/// tests match on them.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a score file cannot answer a request (stale digest, underrun,
/// malformed record).
class ScoreFileError : public Error {
 public:
  using Error::Error;
};

}  // namespace shred
