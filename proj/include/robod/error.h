#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robod {

// Categories reported in the CLI's machine-readable error JSON (`error.kind`).
enum class ErrorKind {
  kShape,
  kConfig,
  kState,
  kIndex,
  kIo,
  kParse,
  kMetric,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace robod
