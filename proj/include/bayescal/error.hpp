#pragma once

#include <stdexcept>
#include <string>

namespace bayescal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition (e.g. nonpositive scale, N < 2 for the full model).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text: CSV, draws, summaries and config files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures, message carries the OS description verbatim.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The sampler could not start or every warmup trajectory diverged.
class SamplerError : public Error {
 public:
  using Error::Error;
};

/// A diagnostic is undefined for the given input (e.g. constant chains).
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

}  // namespace bayescal
