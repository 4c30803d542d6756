#pragma once

#include <stdexcept>
#include <string>

namespace shapgraph {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something outside an operation's domain.
class InputError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was broken by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent dataset / weight / explanation file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Problem size exceeds an enumeration guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace shapgraph
