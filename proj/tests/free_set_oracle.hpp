#pragma once

// Reference model of the pool's allocation order, kept independent of the
// in-block free chain: an explicit stack of freed indices (most recently freed
// is reused first) plus a frontier of never-used indices handed out in order.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

namespace fixpool::testing {

class FreeSetOracle {
 public:
  explicit FreeSetOracle(std::uint64_t block_count) : block_count_(block_count) {}

  std::optional<std::uint32_t> allocate() {
    std::uint32_t index;
    if (!freed_.empty()) {
      index = freed_.back();
      freed_.pop_back();
    } else if (frontier_ < block_count_) {
      index = static_cast<std::uint32_t>(frontier_++);
    } else {
      return std::nullopt;
    }
    live_.insert(index);
    return index;
  }

  void deallocate(std::uint32_t index) {
    live_.erase(index);
    freed_.push_back(index);
  }

  void grow(std::uint64_t new_block_count) { block_count_ = new_block_count; }
  void shrink(std::uint64_t new_block_count) { block_count_ = new_block_count; }

  bool is_live(std::uint32_t index) const { return live_.count(index) != 0; }
  const std::set<std::uint32_t>& live() const { return live_; }
  std::uint64_t free_count() const { return block_count_ - live_.size(); }
  std::uint64_t block_count() const { return block_count_; }

  std::uint64_t frontier() const { return frontier_; }

  /// Free indices in reuse order, given how many blocks the pool has linked
  /// into its chain: freed stack top first, then linked-but-unused frontier
  /// blocks in index order.
  std::vector<std::uint32_t> expected_chain(std::uint64_t initialized) const {
    std::vector<std::uint32_t> chain(freed_.rbegin(), freed_.rend());
    for (std::uint64_t i = frontier_; i < initialized; ++i) {
      chain.push_back(static_cast<std::uint32_t>(i));
    }
    return chain;
  }

 private:
  std::uint64_t block_count_;
  std::uint64_t frontier_ = 0;
  std::vector<std::uint32_t> freed_;
  std::set<std::uint32_t> live_;
};

}  // namespace fixpool::testing
