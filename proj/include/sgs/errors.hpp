#pragma once

#include <stdexcept>
#include <string>

namespace sgs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape vectors or encoded vectors of mismatched layer count.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Input values outside the allowed elastic choices or layer bounds.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unusable configuration (zero bandwidth, empty subnet list, PB too small).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A SubGraph that does not fit the persistent buffer.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Unknown row/column id in a latency table.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; message carries the file and field path.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Latency table whose hardware fingerprint does not match the config in use.
class StaleTableError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgs
