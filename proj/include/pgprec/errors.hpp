#pragma once

#include <stdexcept>
#include <string>

namespace pgprec {

// Error taxonomy mirrored by the CLI exit codes: config/usage -> 2,
// checkpoint mismatch -> 3, data -> 4, numeric/contract -> 5.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct CheckpointError : Error {
  using Error::Error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct ContractError : Error {
  using Error::Error;
};

}  // namespace pgprec
