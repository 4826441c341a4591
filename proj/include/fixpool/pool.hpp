#pragma once

// Fixed-size block pool with the free list threaded through the unused blocks.
//
// The region is split into block_count blocks of block_size_bytes each. A free
// block holds, in its first four bytes, the index of the next free block.
// Blocks are linked into that list lazily: every allocate() initializes
// exactly one not-yet-touched block (the "frontier") until all blocks have
// been touched, so creating a pool never visits its blocks.
//
// Bookkeeping is six scalars plus the region pointer; nothing scales with the
// block count. A pool is not thread-safe; serialize access externally.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fixpool/error.hpp"

namespace fixpool {

using BlockIndex = std::uint32_t;

inline constexpr std::size_t kIndexBytes = sizeof(BlockIndex);
inline constexpr std::uint64_t kMaxBlockCount =
    std::numeric_limits<BlockIndex>::max();
inline constexpr std::size_t kRegionAlignment = alignof(std::max_align_t);
/// Never a valid block index (block_count is at most 2^32 - 1).
inline constexpr BlockIndex kNoBlock = std::numeric_limits<BlockIndex>::max();

struct PoolConfig {
  std::size_t block_size_bytes = 0;
  std::uint64_t block_count = 0;
};

/// Throws Error{kConfig} unless the block size holds an index, the count fits
/// in a 32-bit index and the region size does not overflow.
void validate(const PoolConfig& config);

struct BlockRef {
  BlockIndex index = 0;
  std::byte* address = nullptr;

  friend bool operator==(const BlockRef&, const BlockRef&) = default;
};

struct PoolStats {
  std::uint64_t block_count = 0;
  std::uint64_t free_count = 0;
  std::uint64_t initialized_count = 0;
  std::size_t block_size_bytes = 0;

  friend bool operator==(const PoolStats&, const PoolStats&) = default;
};

/// Result of walking the free chain from its head for exactly
/// initialized_count - outstanding steps. `tail` is the index referenced after
/// the last step (the frontier or the full-pool sentinel); it is empty when
/// the pool has no head.
struct FreeChainWalk {
  std::vector<BlockIndex> indices;
  std::optional<std::uint64_t> tail;
};

/// Write probes observe every store the pool makes into block payloads.
struct NullWriteProbe {
  void on_block_write(BlockIndex) noexcept {}
};

class CountingWriteProbe {
 public:
  void on_block_write(BlockIndex) noexcept { ++writes_; }
  std::uint64_t writes() const noexcept { return writes_; }

 private:
  std::uint64_t writes_ = 0;
};

/// Requests room for in-place growth: the region is reserved for
/// max_block_count blocks but the pool starts with the configured count.
struct GrowCapacity {
  std::uint64_t max_block_count = 0;
};

namespace detail {
[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);
std::byte* acquire_region(std::size_t bytes);
void release_region(std::byte* region) noexcept;
}  // namespace detail

template <class WriteProbe = NullWriteProbe>
class BasicPool {
 public:
  explicit BasicPool(const PoolConfig& config)
      : BasicPool(config, GrowCapacity{config.block_count}) {}

  BasicPool(const PoolConfig& config, GrowCapacity capacity) {
    validate(config);
    if (capacity.max_block_count < config.block_count) {
      detail::throw_error(ErrorKind::kConfig,
                          "grow capacity is smaller than the block count");
    }
    validate(PoolConfig{config.block_size_bytes, capacity.max_block_count});
    start_ = detail::acquire_region(config.block_size_bytes *
                                    capacity.max_block_count);
    owns_region_ = true;
    init(config.block_size_bytes, config.block_count, capacity.max_block_count);
  }

  /// Builds a pool over caller-owned storage; the storage must outlive the
  /// pool. block_count = storage.size() / block_size_bytes.
  BasicPool(std::span<std::byte> storage, std::size_t block_size_bytes) {
    if (block_size_bytes == 0) {
      detail::throw_error(ErrorKind::kConfig, "block size must be positive");
    }
    const PoolConfig config{block_size_bytes,
                            storage.size() / block_size_bytes};
    validate(config);
    start_ = storage.data();
    owns_region_ = false;
    init(config.block_size_bytes, config.block_count, config.block_count);
  }

  ~BasicPool() { release(); }

  BasicPool(const BasicPool&) = delete;
  BasicPool& operator=(const BasicPool&) = delete;

  BasicPool(BasicPool&& other) noexcept { steal(other); }
  BasicPool& operator=(BasicPool&& other) noexcept {
    if (this != &other) {
      release();
      steal(other);
    }
    return *this;
  }

  /// Accepts i == block_count (the one-past-end frontier position).
  std::byte* addr_from_index(std::uint64_t i) const {
    if (i > block_count_) {
      detail::throw_error(ErrorKind::kRange, "block index out of range");
    }
    return start_ + static_cast<std::size_t>(i) * block_size_;
  }

  BlockIndex index_from_addr(const void* address) const {
    return checked_index(address);
  }

  /// Returns the head block, or nullptr when the pool is exhausted.
  void* allocate_address() noexcept {
    if (initialized_ < block_count_) {
      store_index(initialized_, initialized_ + 1);
      ++initialized_;
      if (block_count_ - initialized_ > kFrontierPrefetch) {
        __builtin_prefetch(
            block_at(initialized_ + kFrontierPrefetch), 1, 3);
      }
    }
    if (free_ == 0) {
      return nullptr;
    }
    std::byte* block = block_at(next_);
    --free_;
    next_ = free_ != 0 ? load_index(block) : kNoBlock;
    return block;
  }

  std::optional<BlockRef> allocate() noexcept {
    auto* block = static_cast<std::byte*>(allocate_address());
    if (block == nullptr) return std::nullopt;
    return BlockRef{index_of(block), block};
  }

  /// Validates range and block alignment. Double frees are not detected here.
  void deallocate(void* address) {
    const BlockIndex index = checked_index(address);
    // A full pool has no head to link to; store the never-decoded sentinel.
    store_index(index, next_ != kNoBlock ? next_ : block_count_);
    next_ = index;
    ++free_;
  }

  PoolStats stats() const noexcept {
    return PoolStats{block_count_, free_, initialized_, block_size_};
  }

  /// Peak number of blocks ever touched; the lowest count shrink() accepts.
  std::uint64_t high_water_mark() const noexcept { return initialized_; }

  std::uint64_t capacity_blocks() const noexcept { return capacity_blocks_; }

  /// Extends the pool in place into reserved capacity. Addresses and contents
  /// of existing blocks are untouched; new blocks join via the frontier.
  void grow(std::uint64_t new_block_count) {
    if (new_block_count <= block_count_) {
      detail::throw_error(ErrorKind::kPrecondition,
                          "grow requires a larger block count");
    }
    if (new_block_count > capacity_blocks_) {
      detail::throw_error(ErrorKind::kGrowUnsupported,
                          "no contiguous capacity to grow into");
    }
    const auto added = static_cast<BlockIndex>(new_block_count - block_count_);
    block_count_ = static_cast<BlockIndex>(new_block_count);
    free_ += added;
    if (next_ == kNoBlock) {
      // Exhausted pool: every block was initialized, so the frontier is the
      // first new block.
      next_ = initialized_;
    }
  }

  /// Truncates never-touched blocks. Equal counts are a no-op.
  void shrink(std::uint64_t new_block_count) {
    if (new_block_count < 1 || new_block_count > block_count_) {
      detail::throw_error(ErrorKind::kPrecondition,
                          "shrink requires 1 <= count <= block_count");
    }
    if (new_block_count < initialized_) {
      detail::throw_error(ErrorKind::kShrinkBlocked,
                          "shrink would cut initialized blocks");
    }
    const auto removed = static_cast<BlockIndex>(block_count_ - new_block_count);
    block_count_ = static_cast<BlockIndex>(new_block_count);
    free_ -= removed;
    if (free_ == 0) {
      next_ = kNoBlock;
    }
  }

  bool contains(const void* address) const noexcept {
    const auto a = reinterpret_cast<std::uintptr_t>(address);
    const auto lo = reinterpret_cast<std::uintptr_t>(start_);
    return a >= lo && a - lo < region_bytes();
  }

  std::byte* region_start() const noexcept { return start_; }
  std::size_t region_bytes() const noexcept {
    return static_cast<std::size_t>(block_count_) * block_size_;
  }
  std::size_t block_size() const noexcept { return block_size_; }
  std::uint64_t block_count() const noexcept { return block_count_; }

  /// Head of the free list, or nullopt when the pool is exhausted.
  std::optional<BlockIndex> next_free_index() const noexcept {
    if (next_ == kNoBlock) return std::nullopt;
    return next_;
  }

  /// Address of the free-list head, or nullptr when the pool is exhausted.
  std::byte* next_free_address() const noexcept {
    return next_ == kNoBlock ? nullptr : block_at(next_);
  }

  /// Raw 32-bit value at the start of block i, whatever it currently holds.
  std::uint32_t stored_index(BlockIndex i) const {
    if (i >= block_count_) {
      detail::throw_error(ErrorKind::kRange, "block index out of range");
    }
    return load_index(block_at(i));
  }

  const WriteProbe& write_probe() const noexcept { return probe_; }

  /// Test-only introspection: walks the free chain. Production paths never
  /// call this; it is the only loop in the class.
  FreeChainWalk debug_walk_free_chain() const {
    FreeChainWalk walk;
    if (next_ == kNoBlock) return walk;
    const std::uint64_t outstanding = block_count_ - free_;
    const std::uint64_t steps =
        initialized_ >= outstanding ? initialized_ - outstanding : 0;
    std::uint64_t current = next_;
    for (std::uint64_t step = 0; step < steps; ++step) {
      if (current >= block_count_) break;
      walk.indices.push_back(static_cast<BlockIndex>(current));
      current = load_index(block_at(static_cast<BlockIndex>(current)));
    }
    walk.tail = current;
    return walk;
  }

 private:
  void init(std::size_t block_size, std::uint64_t count,
            std::uint64_t capacity) noexcept {
    block_size_ = block_size;
    block_shift_ = std::has_single_bit(block_size)
                       ? static_cast<std::uint8_t>(std::countr_zero(block_size))
                       : kNoShift;
    block_count_ = static_cast<BlockIndex>(count);
    capacity_blocks_ = static_cast<BlockIndex>(capacity);
    free_ = block_count_;
    initialized_ = 0;
    next_ = 0;
  }

  void release() noexcept {
    if (owns_region_ && start_ != nullptr) {
      detail::release_region(start_);
    }
    start_ = nullptr;
    next_ = kNoBlock;
  }

  void steal(BasicPool& other) noexcept {
    start_ = std::exchange(other.start_, nullptr);
    next_ = std::exchange(other.next_, kNoBlock);
    block_size_ = other.block_size_;
    block_shift_ = other.block_shift_;
    block_count_ = std::exchange(other.block_count_, 0);
    capacity_blocks_ = std::exchange(other.capacity_blocks_, 0);
    free_ = std::exchange(other.free_, 0);
    initialized_ = std::exchange(other.initialized_, 0);
    owns_region_ = std::exchange(other.owns_region_, false);
    probe_ = other.probe_;
  }

  BlockIndex checked_index(const void* address) const {
    const auto a = reinterpret_cast<std::uintptr_t>(address);
    const auto lo = reinterpret_cast<std::uintptr_t>(start_);
    if (a < lo || a - lo >= region_bytes()) {
      detail::throw_error(ErrorKind::kRange, "address outside the pool region");
    }
    const std::size_t offset = a - lo;
    const std::size_t index = divide_by_block_size(offset);
    if (offset != index * block_size_) {
      detail::throw_error(ErrorKind::kAlignment,
                          "address is not at a block boundary");
    }
    return static_cast<BlockIndex>(index);
  }

  std::byte* block_at(BlockIndex i) const noexcept {
    return start_ + static_cast<std::size_t>(i) * block_size_;
  }

  std::size_t divide_by_block_size(std::size_t offset) const noexcept {
    return block_shift_ != kNoShift ? offset >> block_shift_
                                    : offset / block_size_;
  }

  BlockIndex index_of(const std::byte* block) const noexcept {
    return static_cast<BlockIndex>(
        divide_by_block_size(static_cast<std::size_t>(block - start_)));
  }

  static BlockIndex load_index(const std::byte* block) noexcept {
    BlockIndex value;
    std::memcpy(&value, block, kIndexBytes);
    return value;
  }

  void store_index(BlockIndex block, BlockIndex value) noexcept {
    probe_.on_block_write(block);
    std::memcpy(block_at(block), &value, kIndexBytes);
  }

  static constexpr std::uint8_t kNoShift = 0xFF;
  static constexpr BlockIndex kFrontierPrefetch = 16;

  std::byte* start_ = nullptr;
  std::size_t block_size_ = 0;
  BlockIndex next_ = kNoBlock;  // free-list head; kNoBlock when exhausted
  BlockIndex block_count_ = 0;
  BlockIndex capacity_blocks_ = 0;
  BlockIndex free_ = 0;
  BlockIndex initialized_ = 0;
  std::uint8_t block_shift_ = kNoShift;  // log2(block_size_) if a power of 2
  bool owns_region_ = false;
  [[no_unique_address]] WriteProbe probe_{};
};

using Pool = BasicPool<>;

extern template class BasicPool<NullWriteProbe>;

}  // namespace fixpool
