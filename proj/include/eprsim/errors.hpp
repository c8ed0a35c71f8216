#pragma once

#include <stdexcept>
#include <string>

namespace eprsim {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: unknown keys, unknown atom names, invalid field values.
class ConfigError : public Error {
public:
  using Error::Error;
};

// An operation's stated precondition does not hold for the given arguments.
class PreconditionError : public Error {
public:
  using Error::Error;
};

// A state with zero total norm was handed to a probability or fidelity readout.
class DegenerateStateError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace eprsim
