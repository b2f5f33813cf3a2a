#pragma once

#include <stdexcept>
#include <string>

namespace adasparse {

// Error taxonomy. Shape/schema/spec errors signal bad inputs, state errors
// signal misuse of forward/backward caches, numeric errors signal divergence.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
  using Error::Error;
};
struct SchemaError : Error {
  using Error::Error;
};
struct SpecError : Error {
  using Error::Error;
};
struct StateError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};
struct MetricError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace adasparse
