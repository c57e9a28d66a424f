#pragma once

#include <stdexcept>
#include <string>

namespace swn {

// Base of every error thrown by the library. The CLI maps ConfigError to
// exit code 2 and every other subclass to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

// Artifacts that do not belong together (vocabulary fingerprint mismatch,
// checkpoint shapes that disagree with the corpus).
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace swn
