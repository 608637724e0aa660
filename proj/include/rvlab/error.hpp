#pragma once

#include <stdexcept>
#include <string>

namespace rvlab {

// Exit codes used by the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitCheck = 4 };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return kExitNumerical; }
};

// Bad parameters, unknown keys, inadmissible ranges.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return kExitConfig; }
};

// Precondition violations on arguments passed to library routines.
class ArgumentError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Input data the numerics cannot represent faithfully (aliasing, clipping).
class RejectedInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepRejected : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SupportOverflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CheckFailure : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return kExitCheck; }
};

}  // namespace rvlab
