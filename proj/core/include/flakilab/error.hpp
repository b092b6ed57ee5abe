#pragma once

#include <stdexcept>
#include <string>

namespace flakilab {

/// Failure categories. The command-line driver maps each one to its own
/// exit status, so every error raised by the library carries one.
enum class ErrorKind { Parse, Invariant, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed input: XML, CSV, JSON or command-line text.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

/// A domain invariant or operation precondition does not hold.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what)
      : Error(ErrorKind::Invariant, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace flakilab
