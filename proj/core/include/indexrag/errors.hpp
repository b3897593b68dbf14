#pragma once

#include <stdexcept>
#include <string>

namespace indexrag {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidEntityError : public Error {
 public:
  using Error::Error;
};

/// Raised for malformed caller input (empty text, duplicate ids, bad config values).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A prompt template was rendered without a binding for one of its placeholders.
class TemplateError : public Error {
 public:
  TemplateError(std::string placeholder, const std::string& message);
  const std::string& placeholder() const noexcept { return placeholder_; }

 private:
  std::string placeholder_;
};

/// Model access failed. `status()` is the HTTP status when one was received, 0 otherwise.
class GatewayError : public Error {
 public:
  GatewayError(const std::string& message, int status = 0);
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ExtractionError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

class PersistenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace indexrag
