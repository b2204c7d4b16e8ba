#pragma once

#include <stdexcept>
#include <string>

namespace evload {

enum class ErrorKind {
  Input,      // invalid user-supplied value or configuration
  Format,     // malformed file structure (header, JSON schema)
  Dimension,  // shape or length mismatch
  Numeric,    // non-finite intermediate value
  Io,         // filesystem failure
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Numeric: return "numeric fault";
    case ErrorKind::Io: return "I/O error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace evload
