#pragma once

// Hybrid allocator: several fixed-size pools ("tiers") in front of the system
// allocator. A request goes to the smallest tier whose block fits it within
// the waste tolerance, provided that tier still has a free block; everything
// else is served by std::malloc and remembered in a registry so it can be
// routed back on free.

#include <cstddef>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "fixpool/pool.hpp"

namespace fixpool {

struct MultiPoolConfig {
  /// Strictly increasing block sizes.
  std::vector<PoolConfig> tiers;
  /// A tier of block size b serves a request of s bytes only if b <= s * waste.
  double waste_factor = 2.0;
};

void validate(const MultiPoolConfig& config);

enum class OwnerKind { kTier, kFallback };

struct Owner {
  OwnerKind kind = OwnerKind::kFallback;
  std::size_t tier = 0;  // meaningful for kTier only

  friend bool operator==(const Owner&, const Owner&) = default;
};

struct MultiPoolStats {
  std::vector<PoolStats> tiers;
  std::uint64_t fallback_count = 0;
  std::size_t fallback_live = 0;
};

class MultiPool {
 public:
  explicit MultiPool(const MultiPoolConfig& config);
  ~MultiPool();

  MultiPool(const MultiPool&) = delete;
  MultiPool& operator=(const MultiPool&) = delete;
  MultiPool(MultiPool&&) noexcept = default;
  MultiPool& operator=(MultiPool&&) noexcept = default;

  /// Never returns nullptr; throws Error{kOutOfMemory} if the fallback fails.
  void* alloc(std::size_t size);

  /// Returns the owner the address was routed to.
  Owner free(void* address);

  /// Tier whose range contains the address, else fallback if registered.
  std::optional<Owner> owner_of(const void* address) const;

  /// Index of the tier alloc(size) would try first, if any qualifies by size.
  std::optional<std::size_t> select_tier(std::size_t size) const noexcept;

  MultiPoolStats stats() const;
  std::size_t tier_count() const noexcept { return tiers_.size(); }
  double waste_factor() const noexcept { return waste_factor_; }

 private:
  std::vector<Pool> tiers_;
  double waste_factor_;
  std::uint64_t fallback_count_ = 0;
  std::unordered_set<void*> fallback_;
};

}  // namespace fixpool
