#include "fixpool/pool.hpp"

#include <limits>
#include <new>

namespace fixpool {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kOutOfMemory: return "out of memory";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kAlignment: return "alignment error";
    case ErrorKind::kDoubleFree: return "double free";
    case ErrorKind::kCorruption: return "corruption";
    case ErrorKind::kGrowUnsupported: return "grow unsupported";
    case ErrorKind::kShrinkBlocked: return "shrink blocked";
    case ErrorKind::kRouting: return "routing error";
    case ErrorKind::kComparison: return "comparison error";
    case ErrorKind::kFile: return "file error";
    case ErrorKind::kPrecondition: return "precondition violation";
  }
  return "unknown error";
}

void validate(const PoolConfig& config) {
  if (config.block_size_bytes < kIndexBytes) {
    detail::throw_error(ErrorKind::kConfig,
                        "block size must be at least 4 bytes");
  }
  if (config.block_count < 1 || config.block_count > kMaxBlockCount) {
    detail::throw_error(ErrorKind::kConfig,
                        "block count must be in [1, 2^32 - 1]");
  }
  if (config.block_count >
      std::numeric_limits<std::size_t>::max() / config.block_size_bytes) {
    detail::throw_error(ErrorKind::kConfig, "region size overflows");
  }
}

namespace detail {

void throw_error(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

std::byte* acquire_region(std::size_t bytes) {
  void* region = ::operator new(bytes, std::align_val_t{kRegionAlignment},
                                std::nothrow);
  if (region == nullptr) {
    throw_error(ErrorKind::kOutOfMemory, "cannot acquire pool region");
  }
  return static_cast<std::byte*>(region);
}

void release_region(std::byte* region) noexcept {
  ::operator delete(region, std::align_val_t{kRegionAlignment});
}

}  // namespace detail

template class BasicPool<NullWriteProbe>;

}  // namespace fixpool
