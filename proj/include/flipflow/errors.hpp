#pragma once

#include <stdexcept>
#include <string>

namespace flipflow {

// Base of every library error. Solver-level errors are caught by the run
// drivers and turned into event records; the rest propagate to the caller.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class TimeOutOfRange : public Error {
 public:
  using Error::Error;
};

class NonPositiveDensity : public Error {
 public:
  using Error::Error;
};

class StepRejected : public Error {
 public:
  using Error::Error;
};

class ConvexityLoss : public Error {
 public:
  using Error::Error;
};

class NotAFlip : public Error {
 public:
  using Error::Error;
};

class DegenerateWindow : public Error {
 public:
  using Error::Error;
};

class EmptyWeights : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid scenario configuration. The message names the field
// or the line and column of a syntax error.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace flipflow
