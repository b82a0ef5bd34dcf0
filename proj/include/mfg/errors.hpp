#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

/// Failure category, mapped to process exit codes by the CLI and to status
/// codes by the C API.
enum class ErrorKind {
  validation, ///< bad configuration or malformed input data
  domain,     ///< cost evaluated outside its mathematical domain
  solver,     ///< numerical failure (factorization, non-finite objective)
  io,         ///< filesystem / format trouble
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

} // namespace mfg
