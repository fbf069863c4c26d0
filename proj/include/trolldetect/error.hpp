#pragma once

#include <stdexcept>
#include <string>

namespace trolldetect {

/// Broad failure category. The CLI maps each kind onto its exit code.
enum class ErrorKind {
  input,    // malformed or schema-violating input data
  numeric,  // degenerate or non-finite data
  io,       // file system failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input:
      return 2;
    case ErrorKind::numeric:
      return 3;
    case ErrorKind::io:
      return 4;
  }
  return 1;
}

}  // namespace trolldetect
