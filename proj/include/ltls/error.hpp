#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ltls {

enum class ErrorKind {
  invalid_argument,
  parse,
  format,
  io,
  integrity,
  capacity,
};

constexpr std::string_view error_category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::capacity: return "capacity";
  }
  return "unknown";
}

// Base of every exception thrown by the library. The kind maps onto the
// single-word category printed by the command line tool.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error(ErrorKind::format, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

struct IntegrityError : Error {
  explicit IntegrityError(const std::string& what) : Error(ErrorKind::integrity, what) {}
};

struct CapacityError : Error {
  explicit CapacityError(const std::string& what) : Error(ErrorKind::capacity, what) {}
};

// Throws the subclass matching `kind`, so callers can add context to a
// message without losing the exception type.
[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::invalid_argument: throw InvalidArgument(what);
    case ErrorKind::parse: throw ParseError(what);
    case ErrorKind::format: throw FormatError(what);
    case ErrorKind::io: throw IoError(what);
    case ErrorKind::integrity: throw IntegrityError(what);
    case ErrorKind::capacity: throw CapacityError(what);
  }
  throw Error(kind, what);
}

}  // namespace ltls
