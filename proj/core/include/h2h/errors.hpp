#pragma once

#include <stdexcept>
#include <string>

namespace h2h {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed configuration or unreadable files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A simulation or optimization produced non-finite numbers.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A query point lies too far from the reference path to be projected.
class OffTrackError : public Error {
 public:
  using Error::Error;
};

/// Procedural generation gave up after its retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace h2h
