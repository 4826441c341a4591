#include "fixpool/debug_pool.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <utility>

namespace fixpool {
namespace {

PoolConfig inner_config(std::size_t payload_size, std::uint64_t block_count,
                        const GuardConfig& config) {
  if (payload_size < kIndexBytes) {
    detail::throw_error(ErrorKind::kConfig,
                        "payload must be at least 4 bytes");
  }
  if (!has(config.enabled_checks, Check::kGuards)) {
    return PoolConfig{payload_size, block_count};
  }
  if (config.guard_size_bytes < 1) {
    detail::throw_error(ErrorKind::kConfig,
                        "guard size must be positive when guards are enabled");
  }
  const std::size_t max = std::numeric_limits<std::size_t>::max();
  if (config.guard_size_bytes > (max - payload_size) / 2) {
    detail::throw_error(ErrorKind::kConfig, "guarded block size overflows");
  }
  return PoolConfig{payload_size + 2 * config.guard_size_bytes, block_count};
}

}  // namespace

const char* to_string(GuardSide side) noexcept {
  return side == GuardSide::kFront ? "front" : "rear";
}

std::string render(const GuardFinding& finding) {
  return "error block=" + std::to_string(finding.block_index) +
         " tag=" + finding.tag + " side=" + to_string(finding.side);
}

std::string render_leak(const AllocationRecord& record) {
  return "warning block=" + std::to_string(record.block_index) +
         " tag=" + record.tag;
}

CorruptionError::CorruptionError(GuardFinding finding)
    : Error(ErrorKind::kCorruption,
            "guard corrupted: block=" + std::to_string(finding.block_index) +
                " tag=" + finding.tag + " side=" + to_string(finding.side)),
      finding_(std::move(finding)) {}

DebugPool::DebugPool(std::size_t payload_size, std::uint64_t block_count,
                     GuardConfig config)
    : config_(config),
      payload_size_(payload_size),
      guard_size_(has(config.enabled_checks, Check::kGuards)
                      ? config.guard_size_bytes
                      : 0),
      inner_(inner_config(payload_size, block_count, config)) {
  if (has(config_.enabled_checks, Check::kDoubleFree)) {
    occupancy_.assign((block_count + 63) / 64, 0);
  }
}

void* DebugPool::allocate_tagged(std::string_view tag) {
  auto* block = static_cast<std::byte*>(inner_.allocate_address());
  if (block == nullptr) return nullptr;
  const BlockIndex index = inner_.index_from_addr(block);
  if (guard_size_ != 0) write_guards(index);
  if (!occupancy_.empty()) {
    occupancy_[index / 64] |= std::uint64_t{1} << (index % 64);
  }
  if (tracks_records()) records_.insert_or_assign(index, std::string(tag));
  ++live_;
  return block + guard_size_;
}

void DebugPool::deallocate_checked(void* payload) {
  const auto address = reinterpret_cast<std::uintptr_t>(payload);
  const auto first_payload =
      reinterpret_cast<std::uintptr_t>(inner_.region_start()) + guard_size_;
  if (has(config_.enabled_checks, Check::kRange) &&
      (address < first_payload ||
       address - first_payload >= inner_.region_bytes())) {
    detail::throw_error(ErrorKind::kRange,
                        "freed address is outside the pool region");
  }
  if (has(config_.enabled_checks, Check::kAlignment) &&
      (address - first_payload) % inner_.block_size() != 0) {
    detail::throw_error(ErrorKind::kAlignment,
                        "freed address is not a payload start");
  }
  auto* block = reinterpret_cast<std::byte*>(address - guard_size_);
  const BlockIndex index = inner_.index_from_addr(block);

  if (!occupancy_.empty() && !occupied(index)) {
    detail::throw_error(ErrorKind::kDoubleFree,
                        "block " + std::to_string(index) + " is not allocated");
  }
  if (guard_size_ != 0) {
    if (!guard_intact(front_guard(index))) {
      throw CorruptionError({index, tag_of(index), GuardSide::kFront});
    }
    if (!guard_intact(rear_guard(index))) {
      throw CorruptionError({index, tag_of(index), GuardSide::kRear});
    }
  }

  if (!occupancy_.empty()) {
    occupancy_[index / 64] &= ~(std::uint64_t{1} << (index % 64));
  }
  records_.erase(index);
  if (live_ > 0) --live_;
  inner_.deallocate(block);
}

std::vector<GuardFinding> DebugPool::check_all_guards() const {
  std::vector<GuardFinding> findings;
  if (guard_size_ == 0) return findings;
  for (const auto& [index, tag] : records_) {
    if (!guard_intact(front_guard(index))) {
      findings.push_back({index, tag, GuardSide::kFront});
    }
    if (!guard_intact(rear_guard(index))) {
      findings.push_back({index, tag, GuardSide::kRear});
    }
  }
  std::sort(findings.begin(), findings.end(),
            [](const GuardFinding& a, const GuardFinding& b) {
              return std::pair(a.block_index, a.side) <
                     std::pair(b.block_index, b.side);
            });
  return findings;
}

std::vector<AllocationRecord> DebugPool::leak_report() const {
  std::vector<AllocationRecord> report;
  if (!has(config_.enabled_checks, Check::kLeaks)) return report;
  report.reserve(records_.size());
  for (const auto& [index, tag] : records_) {
    report.push_back({index, tag, true});
  }
  std::sort(report.begin(), report.end(),
            [](const AllocationRecord& a, const AllocationRecord& b) {
              return a.block_index < b.block_index;
            });
  return report;
}

bool DebugPool::occupied(BlockIndex index) const noexcept {
  if (occupancy_.empty()) return false;
  return (occupancy_[index / 64] >> (index % 64)) & 1u;
}

std::byte* DebugPool::front_guard(BlockIndex index) const noexcept {
  return inner_.region_start() +
         static_cast<std::size_t>(index) * inner_.block_size();
}

std::byte* DebugPool::rear_guard(BlockIndex index) const noexcept {
  return front_guard(index) + guard_size_ + payload_size_;
}

bool DebugPool::guard_intact(const std::byte* guard) const noexcept {
  const auto pattern = static_cast<std::byte>(config_.guard_pattern);
  return std::all_of(guard, guard + guard_size_,
                     [pattern](std::byte b) { return b == pattern; });
}

void DebugPool::write_guards(BlockIndex index) noexcept {
  std::memset(front_guard(index), config_.guard_pattern, guard_size_);
  std::memset(rear_guard(index), config_.guard_pattern, guard_size_);
}

bool DebugPool::tracks_records() const noexcept {
  return has(config_.enabled_checks, Check::kGuards) ||
         has(config_.enabled_checks, Check::kLeaks);
}

std::string DebugPool::tag_of(BlockIndex index) const {
  const auto it = records_.find(index);
  return it != records_.end() ? it->second : std::string();
}

}  // namespace fixpool
