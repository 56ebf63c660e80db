#pragma once

#include <stdexcept>
#include <string>

namespace stopmc {

/// Invalid problem or run configuration (bad timestep, start outside D, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulated path produced a non-finite coordinate.
class SimulationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fourth-moment ratio requested for a sample set with zero variance or N < 4.
class UndefinedKurtosis : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Oracle evaluated outside its closed domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Output file could not be written; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stopmc
