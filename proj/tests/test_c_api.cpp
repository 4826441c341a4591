// Exercises the shared library through its C header only.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixpool/fixpool.h"

TEST_CASE("pool lifecycle through the C API") {
  fixpool_pool* pool = nullptr;
  REQUIRE(fixpool_create(16, 4, &pool) == FIXPOOL_OK);
  fixpool_stats stats{};
  REQUIRE(fixpool_get_stats(pool, &stats) == FIXPOOL_OK);
  CHECK(stats.block_count == 4);
  CHECK(stats.free_count == 4);
  CHECK(stats.initialized_count == 0);
  CHECK(stats.block_size_bytes == 16);

  void* blocks[4];
  for (auto& b : blocks) REQUIRE(fixpool_allocate(pool, &b) == FIXPOOL_OK);
  void* none = reinterpret_cast<void*>(1);
  CHECK(fixpool_allocate(pool, &none) == FIXPOOL_OK);
  CHECK(none == nullptr);

  std::uint32_t index = 0;
  CHECK(fixpool_index_from_addr(pool, blocks[3], &index) == FIXPOOL_OK);
  CHECK(index == 3);
  void* addr = nullptr;
  CHECK(fixpool_addr_from_index(pool, 2, &addr) == FIXPOOL_OK);
  CHECK(addr == blocks[2]);
  CHECK(fixpool_addr_from_index(pool, 5, &addr) == FIXPOOL_ERR_RANGE);

  CHECK(fixpool_deallocate(pool, static_cast<char*>(blocks[1]) + 3) ==
        FIXPOOL_ERR_ALIGNMENT);
  CHECK(std::strlen(fixpool_last_error()) > 0);
  CHECK(fixpool_deallocate(pool, blocks[1]) == FIXPOOL_OK);
  std::uint64_t hwm = 0;
  CHECK(fixpool_high_water_mark(pool, &hwm) == FIXPOOL_OK);
  CHECK(hwm == 4);
  fixpool_destroy(pool);
  fixpool_destroy(nullptr);
}

TEST_CASE("configuration errors map to status codes") {
  fixpool_pool* pool = reinterpret_cast<fixpool_pool*>(1);
  CHECK(fixpool_create(3, 8, &pool) == FIXPOOL_ERR_CONFIG);
  CHECK(pool == nullptr);
  CHECK(fixpool_create(16, 4, nullptr) == FIXPOOL_ERR_INVALID_ARGUMENT);
  CHECK(std::string(fixpool_status_string(FIXPOOL_ERR_DOUBLE_FREE)) ==
        "double free");
}

TEST_CASE("resizing through the C API") {
  fixpool_pool* pool = nullptr;
  REQUIRE(fixpool_create_resizable(8, 2, 4, &pool) == FIXPOOL_OK);
  void* p = nullptr;
  fixpool_allocate(pool, &p);
  fixpool_allocate(pool, &p);
  CHECK(fixpool_grow(pool, 5) == FIXPOOL_ERR_GROW_UNSUPPORTED);
  CHECK(fixpool_grow(pool, 2) == FIXPOOL_ERR_PRECONDITION);
  CHECK(fixpool_grow(pool, 4) == FIXPOOL_OK);
  CHECK(fixpool_shrink(pool, 1) == FIXPOOL_ERR_SHRINK_BLOCKED);
  CHECK(fixpool_shrink(pool, 2) == FIXPOOL_OK);
  fixpool_destroy(pool);
}

TEST_CASE("debug pool through the C API") {
  fixpool_debug_pool* dp = nullptr;
  REQUIRE(fixpool_debug_create(16, 4, nullptr, &dp) == FIXPOOL_OK);
  void* a = nullptr;
  void* b = nullptr;
  REQUIRE(fixpool_debug_allocate(dp, "sprite", &a) == FIXPOOL_OK);
  REQUIRE(fixpool_debug_allocate(dp, "sound", &b) == FIXPOOL_OK);

  static_cast<unsigned char*>(b)[16] = 0;
  size_t count = 0;
  fixpool_finding findings[2];
  CHECK(fixpool_debug_check_guards(dp, findings, 2, &count) == FIXPOOL_OK);
  REQUIRE(count == 1);
  CHECK(findings[0].block_index == 1);
  CHECK(findings[0].side == FIXPOOL_SIDE_REAR);
  CHECK(std::string(findings[0].tag) == "sound");

  fixpool_finding finding{};
  CHECK(fixpool_debug_deallocate(dp, b, &finding) == FIXPOOL_ERR_CORRUPTION);
  CHECK(std::string(finding.tag) == "sound");

  CHECK(fixpool_debug_deallocate(dp, a, nullptr) == FIXPOOL_OK);
  CHECK(fixpool_debug_deallocate(dp, a, nullptr) == FIXPOOL_ERR_DOUBLE_FREE);

  CHECK(fixpool_debug_leak_report(dp, nullptr, 0, &count) ==
        FIXPOOL_ERR_BUFFER_TOO_SMALL);
  CHECK(count == 1);
  fixpool_finding leak{};
  CHECK(fixpool_debug_leak_report(dp, &leak, 1, &count) == FIXPOOL_OK);
  CHECK(std::string(leak.tag) == "sound");

  std::string long_tag(200, 'x');
  void* c = nullptr;
  REQUIRE(fixpool_debug_allocate(dp, long_tag.c_str(), &c) == FIXPOOL_OK);
  fixpool_finding leaks[2];
  CHECK(fixpool_debug_leak_report(dp, leaks, 2, &count) == FIXPOOL_OK);
  CHECK(leaks[0].block_index == 0);  // reused block
  CHECK(std::strlen(leaks[0].tag) == FIXPOOL_TAG_CAPACITY - 1);

  fixpool_guard_config bad = fixpool_default_guard_config();
  bad.enabled_checks = 1u << 9;
  fixpool_debug_pool* other = nullptr;
  CHECK(fixpool_debug_create(16, 4, &bad, &other) ==
        FIXPOOL_ERR_INVALID_ARGUMENT);
  fixpool_debug_destroy(dp);
}

TEST_CASE("multi-pool through the C API") {
  const fixpool_tier tiers[] = {{16, 4}, {64, 4}};
  fixpool_multipool* mp = nullptr;
  REQUIRE(fixpool_multi_create(tiers, 2, 2.0, &mp) == FIXPOOL_OK);
  void* small = nullptr;
  void* big = nullptr;
  CHECK(fixpool_multi_alloc(mp, 16, &small) == FIXPOOL_OK);
  CHECK(fixpool_multi_alloc(mp, 4096, &big) == FIXPOOL_OK);
  fixpool_stats stats[2];
  size_t n = 0;
  std::uint64_t fallbacks = 0;
  CHECK(fixpool_multi_stats(mp, stats, 2, &n, &fallbacks) == FIXPOOL_OK);
  CHECK(n == 2);
  CHECK(stats[0].free_count == 3);
  CHECK(fallbacks == 1);
  CHECK(fixpool_multi_free(mp, small) == FIXPOOL_OK);
  CHECK(fixpool_multi_free(mp, big) == FIXPOOL_OK);
  CHECK(fixpool_multi_free(mp, big) == FIXPOOL_ERR_ROUTING);

  const fixpool_tier unsorted[] = {{64, 4}, {16, 4}};
  fixpool_multipool* bad = nullptr;
  CHECK(fixpool_multi_create(unsorted, 2, 2.0, &bad) == FIXPOOL_ERR_CONFIG);
  fixpool_multi_destroy(mp);
}

TEST_CASE("benchmark run, csv and compare through the C API") {
  const size_t sizes[] = {16, 64};
  const std::uint64_t counts[] = {500};
  fixpool_bench_plan plan{};
  plan.allocator = FIXPOOL_BENCH_POOL;
  plan.block_sizes = sizes;
  plan.block_size_count = 2;
  plan.op_counts = counts;
  plan.op_count_count = 1;
  plan.pattern = FIXPOOL_BENCH_CHURN;
  plan.repetitions = 2;
  plan.has_seed = 1;
  plan.seed = 3;

  fixpool_bench_report* pool = nullptr;
  REQUIRE(fixpool_bench_run(&plan, &pool) == FIXPOOL_OK);
  CHECK(fixpool_bench_row_count(pool) == 8);
  CHECK(fixpool_bench_failure_count(pool) == 0);

  plan.allocator = FIXPOOL_BENCH_SYSTEM;
  fixpool_bench_report* system = nullptr;
  REQUIRE(fixpool_bench_run(&plan, &system) == FIXPOOL_OK);
  CHECK(fixpool_bench_row_count(system) == 4);

  fixpool_speedup speedups[2];
  size_t count = 0;
  CHECK(fixpool_bench_compare(pool, system, speedups, 2, &count) == FIXPOOL_OK);
  CHECK(count == 2);
  CHECK(speedups[0].block_size == 16);
  CHECK(speedups[0].pattern == FIXPOOL_BENCH_CHURN);
  CHECK(speedups[0].ratio > 0.0);

  const auto path =
      (std::filesystem::temp_directory_path() / "fixpool_capi.csv").string();
  CHECK(fixpool_bench_write_csv(pool, path.c_str()) == FIXPOOL_OK);
  fixpool_bench_report* reread = nullptr;
  CHECK(fixpool_bench_read_csv(path.c_str(), &reread) == FIXPOOL_OK);
  CHECK(fixpool_bench_row_count(reread) == 8);
  CHECK(fixpool_bench_report_append(reread, system) == FIXPOOL_OK);
  CHECK(fixpool_bench_row_count(reread) == 12);
  std::filesystem::remove(path);

  plan.has_seed = 0;
  fixpool_bench_report* invalid = nullptr;
  CHECK(fixpool_bench_run(&plan, &invalid) == FIXPOOL_ERR_CONFIG);
  CHECK(fixpool_bench_read_csv("/nonexistent.csv", &invalid) ==
        FIXPOOL_ERR_FILE);

  fixpool_bench_report_destroy(reread);
  fixpool_bench_report_destroy(system);
  fixpool_bench_report_destroy(pool);
}
