#pragma once

#include <stdexcept>
#include <string>

namespace selfpref {

// All library failures derive from Error so callers (and the CLI's JSON error
// path) can report a stable `kind()` alongside the message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse_error", message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation_error", message) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message, bool retryable = true)
      : Error("transport_error", message), retryable_(retryable) {}

  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class MalformedResponse : public Error {
 public:
  MalformedResponse(const std::string& message, std::string raw)
      : Error("malformed_response", message), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& message) : Error("estimation_error", message) {}
};

}  // namespace selfpref
