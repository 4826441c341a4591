#include "fixpool/multipool.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace fixpool {

void validate(const MultiPoolConfig& config) {
  if (std::isnan(config.waste_factor) || config.waste_factor < 1.0) {
    detail::throw_error(ErrorKind::kConfig, "waste factor must be >= 1");
  }
  for (std::size_t i = 0; i < config.tiers.size(); ++i) {
    validate(config.tiers[i]);
    if (i > 0 && config.tiers[i].block_size_bytes <=
                     config.tiers[i - 1].block_size_bytes) {
      detail::throw_error(ErrorKind::kConfig,
                          "tier block sizes must be strictly increasing");
    }
  }
}

MultiPool::MultiPool(const MultiPoolConfig& config)
    : waste_factor_(config.waste_factor) {
  validate(config);
  tiers_.reserve(config.tiers.size());
  // A failing tier unwinds the ones already built.
  for (const auto& tier : config.tiers) tiers_.emplace_back(tier);
}

MultiPool::~MultiPool() {
  for (void* p : fallback_) std::free(p);
}

std::optional<std::size_t> MultiPool::select_tier(
    std::size_t size) const noexcept {
  const auto it = std::lower_bound(
      tiers_.begin(), tiers_.end(), size,
      [](const Pool& tier, std::size_t s) { return tier.block_size() < s; });
  if (it == tiers_.end()) return std::nullopt;
  // Larger tiers only waste more, so the first fitting tier decides.
  if (static_cast<double>(it->block_size()) >
      static_cast<double>(size) * waste_factor_) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - tiers_.begin());
}

void* MultiPool::alloc(std::size_t size) {
  if (size == 0) {
    detail::throw_error(ErrorKind::kPrecondition, "allocation size must be >= 1");
  }
  if (const auto tier = select_tier(size)) {
    if (void* block = tiers_[*tier].allocate_address()) return block;
  }
  void* p = std::malloc(size);
  if (p == nullptr) {
    detail::throw_error(ErrorKind::kOutOfMemory, "system allocator failed");
  }
  fallback_.insert(p);
  ++fallback_count_;
  return p;
}

Owner MultiPool::free(void* address) {
  const auto owner = owner_of(address);
  if (!owner) {
    detail::throw_error(ErrorKind::kRouting,
                        "address is not owned by any tier or the fallback");
  }
  if (owner->kind == OwnerKind::kTier) {
    tiers_[owner->tier].deallocate(address);
  } else {
    fallback_.erase(address);
    std::free(address);
  }
  return *owner;
}

std::optional<Owner> MultiPool::owner_of(const void* address) const {
  for (std::size_t i = 0; i < tiers_.size(); ++i) {
    if (tiers_[i].contains(address)) return Owner{OwnerKind::kTier, i};
  }
  if (fallback_.count(const_cast<void*>(address)) != 0) {
    return Owner{OwnerKind::kFallback, 0};
  }
  return std::nullopt;
}

MultiPoolStats MultiPool::stats() const {
  MultiPoolStats out;
  out.tiers.reserve(tiers_.size());
  for (const auto& tier : tiers_) out.tiers.push_back(tier.stats());
  out.fallback_count = fallback_count_;
  out.fallback_live = fallback_.size();
  return out;
}

}  // namespace fixpool
