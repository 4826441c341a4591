#pragma once

#include <stdexcept>
#include <string>

namespace fixpool {

enum class ErrorKind {
  kConfig,
  kOutOfMemory,
  kRange,
  kAlignment,
  kDoubleFree,
  kCorruption,
  kGrowUnsupported,
  kShrinkBlocked,
  kRouting,
  kComparison,
  kFile,
  kPrecondition,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so the
/// C API can map it onto a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fixpool
