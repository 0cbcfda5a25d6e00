#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seatrack {

// Base class for every failure the library raises on purpose. The CLI maps
// subclasses onto exit codes, so keep the hierarchy flat and specific.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Tensor/layer shapes that do not line up.
class DimensionError : public Error {
public:
  using Error::Error;
};

// A caller passed a value outside the documented domain.
class ArgumentError : public Error {
public:
  using Error::Error;
};

// Malformed input: bad CSV header, bad config key, unparseable value.
class FormatError : public Error {
public:
  using Error::Error;
};

// The OS said no: missing file, failed write.
class IoError : public Error {
public:
  using Error::Error;
};

// Data made it through parsing but cannot be turned into a training set.
class PipelineError : public Error {
public:
  using Error::Error;
};

// An operation was called in the wrong order, e.g. backward before forward.
class StateError : public Error {
public:
  using Error::Error;
};

// A non-finite value showed up where only finite numbers are allowed.
class NumericError : public Error {
public:
  using Error::Error;
};

// Training produced a non-finite loss, gradient or weight.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& msg, std::size_t epoch, std::size_t batch)
      : Error(msg), epoch(epoch), batch(batch) {}
  std::size_t epoch = 0;
  std::size_t batch = 0;
};

// Anything wrong with a saved model file. The kind distinguishes "not ours",
// "newer format", "cut short" and "weights do not fit the declared model".
class CheckpointError : public Error {
public:
  enum class Kind { bad_magic, version_mismatch, truncated, bad_manifest, shape_mismatch };
  CheckpointError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}
  Kind kind;
};

}  // namespace seatrack
