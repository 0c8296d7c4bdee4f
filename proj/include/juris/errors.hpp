#pragma once

#include <stdexcept>
#include <string>

namespace juris {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input data: violated invariants, duplicate ids, out-of-range fields.
struct ValidationError : Error {
  using Error::Error;
};

// Malformed file or LLM payload that could not be parsed.
struct ParseError : Error {
  using Error::Error;
};

// Filesystem problems: missing files, unwritable directories, bad checksums.
struct IoError : Error {
  using Error::Error;
};

// Network-level failure after retries were exhausted.
struct TransportError : Error {
  using Error::Error;
};

// Bad CLI usage or configuration; maps to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// A pipeline stage failed in a way that aborts the trial for this case.
struct StageError : Error {
  StageError(const std::string& what, std::string raw = "")
      : Error(what), raw_response(std::move(raw)) {}
  std::string raw_response;  // preserved LLM output, possibly empty
};

}  // namespace juris
