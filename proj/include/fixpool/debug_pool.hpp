#pragma once

// Verification layer over Pool. Each inner block is laid out as
//
//   [ front guard | payload | rear guard ]
//
// Guards are (re)written whenever a block is handed out, since a freed block's
// first bytes carry the free-list index. Freed addresses are checked for
// range, block alignment, occupancy (double free) and local guard integrity
// before being returned to the inner pool. Live allocations keep a caller tag
// so unfreed blocks can be reported as leaks.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fixpool/pool.hpp"

namespace fixpool {

enum class Check : unsigned {
  kNone = 0,
  kRange = 1u << 0,
  kAlignment = 1u << 1,
  kDoubleFree = 1u << 2,
  kGuards = 1u << 3,
  kLeaks = 1u << 4,
  kAll = (1u << 5) - 1,
};

constexpr Check operator|(Check a, Check b) noexcept {
  return static_cast<Check>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr Check operator&(Check a, Check b) noexcept {
  return static_cast<Check>(static_cast<unsigned>(a) & static_cast<unsigned>(b));
}
constexpr bool has(Check set, Check flag) noexcept {
  return (set & flag) != Check::kNone;
}

struct GuardConfig {
  std::size_t guard_size_bytes = 4;
  std::uint8_t guard_pattern = 0xFD;
  Check enabled_checks = Check::kAll;
};

enum class GuardSide { kFront, kRear };

const char* to_string(GuardSide side) noexcept;

struct AllocationRecord {
  BlockIndex block_index = 0;
  std::string tag;
  bool live = false;

  friend bool operator==(const AllocationRecord&,
                         const AllocationRecord&) = default;
};

struct GuardFinding {
  BlockIndex block_index = 0;
  std::string tag;
  GuardSide side = GuardSide::kFront;

  friend bool operator==(const GuardFinding&, const GuardFinding&) = default;
};

/// "error block=<index> tag=<tag> side=<front|rear>"
std::string render(const GuardFinding& finding);
/// "warning block=<index> tag=<tag>"
std::string render_leak(const AllocationRecord& record);

/// Raised by deallocate_checked when a guard of the freed block is damaged.
class CorruptionError : public Error {
 public:
  explicit CorruptionError(GuardFinding finding);
  const GuardFinding& finding() const noexcept { return finding_; }

 private:
  GuardFinding finding_;
};

class DebugPool {
 public:
  DebugPool(std::size_t payload_size, std::uint64_t block_count,
            GuardConfig config = {});

  /// Payload address, or nullptr when the pool is exhausted.
  void* allocate_tagged(std::string_view tag);

  void deallocate_checked(void* payload);

  /// Guards of every live block, ordered by block index then side.
  std::vector<GuardFinding> check_all_guards() const;

  /// Live records ordered by block index. Empty when leak tracking is off.
  std::vector<AllocationRecord> leak_report() const;

  std::size_t payload_size() const noexcept { return payload_size_; }
  std::size_t guard_size() const noexcept { return guard_size_; }
  std::size_t inner_block_size() const noexcept { return inner_.block_size(); }
  std::size_t live_count() const noexcept { return live_; }
  const Pool& inner() const noexcept { return inner_; }
  const GuardConfig& config() const noexcept { return config_; }

  bool occupied(BlockIndex index) const noexcept;

 private:
  std::byte* front_guard(BlockIndex index) const noexcept;
  std::byte* rear_guard(BlockIndex index) const noexcept;
  bool guard_intact(const std::byte* guard) const noexcept;
  void write_guards(BlockIndex index) noexcept;
  bool tracks_records() const noexcept;
  std::string tag_of(BlockIndex index) const;

  GuardConfig config_;
  std::size_t payload_size_;
  std::size_t guard_size_;
  Pool inner_;
  std::vector<std::uint64_t> occupancy_;
  std::unordered_map<BlockIndex, std::string> records_;
  std::size_t live_ = 0;
};

}  // namespace fixpool
