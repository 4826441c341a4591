#pragma once

#include <set>

#include "doctest.h"
#include "fixpool/pool.hpp"

namespace fixpool::testing {

/// Checks every structural invariant of a pool, walking its free chain.
template <class Probe>
void check_pool_invariants(const BasicPool<Probe>& pool) {
  const PoolStats s = pool.stats();
  REQUIRE(s.free_count <= s.block_count);
  REQUIRE(s.initialized_count <= s.block_count);
  REQUIRE(s.initialized_count >= s.block_count - s.free_count);
  REQUIRE(pool.next_free_index().has_value() == (s.free_count > 0));

  const FreeChainWalk walk = pool.debug_walk_free_chain();
  const std::uint64_t outstanding = s.block_count - s.free_count;
  if (s.free_count == 0) {
    REQUIRE(walk.indices.empty());
    REQUIRE_FALSE(walk.tail.has_value());
    return;
  }
  REQUIRE(walk.indices.size() == s.initialized_count - outstanding);
  std::set<BlockIndex> distinct(walk.indices.begin(), walk.indices.end());
  REQUIRE(distinct.size() == walk.indices.size());
  for (BlockIndex i : walk.indices) REQUIRE(i < s.initialized_count);
  // The chain ends at the frontier, which equals the sentinel block_count
  // once every block has been initialized.
  REQUIRE(walk.tail.has_value());
  REQUIRE(*walk.tail == s.initialized_count);
}

}  // namespace fixpool::testing
