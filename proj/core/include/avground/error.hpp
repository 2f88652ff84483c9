#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avground {

// Root of every error the library throws. Reward functions never throw on
// malformed model text; errors are reserved for contract violations.
struct Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedTimestamp : Error {
  using Error::Error;
};

struct MalformedInterval : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct InvalidConfig : Error {
  using Error::Error;
};

// Errors tied to one line of a JSONL input carry the 1-based line number
// (0 when the error is not attributable to a line).
struct LineError : Error {
  std::size_t line = 0;
  LineError(const std::string& message, std::size_t line_no)
      : Error(line_no ? "line " + std::to_string(line_no) + ": " + message : message),
        line(line_no) {}
};

struct SchemaError : LineError {
  using LineError::LineError;
  explicit SchemaError(const std::string& message) : LineError(message, 0) {}
};

struct ValidationError : LineError {
  using LineError::LineError;
  explicit ValidationError(const std::string& message) : LineError(message, 0) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct DegenerateAgreement : Error {
  using Error::Error;
};

struct EmptyResults : Error {
  using Error::Error;
};

struct EmptyCorpus : Error {
  using Error::Error;
};

struct UnknownMetric : Error {
  using Error::Error;
};

struct GroupSizeMismatch : Error {
  using Error::Error;
};

struct UnknownSubtask : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

struct EmptyAnnotation : Error {
  using Error::Error;
};

struct UnresolvedQaId : Error {
  using Error::Error;
};

struct EndpointUnreachable : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace avground
