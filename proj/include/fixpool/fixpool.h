/* C interface to the fixpool library.
 *
 * Every object is an opaque handle created by a *_create function and released
 * by the matching *_destroy function (which accepts NULL). Functions return a
 * fixpool_status; on failure fixpool_last_error() describes the most recent
 * error on the calling thread. Handles are not thread-safe.
 */
#ifndef FIXPOOL_FIXPOOL_H_
#define FIXPOOL_FIXPOOL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FIXPOOL_BUILDING_LIBRARY)
#    define FIXPOOL_API __declspec(dllexport)
#  else
#    define FIXPOOL_API __declspec(dllimport)
#  endif
#else
#  define FIXPOOL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fixpool_status {
  FIXPOOL_OK = 0,
  FIXPOOL_ERR_CONFIG = 1,
  FIXPOOL_ERR_OUT_OF_MEMORY = 2,
  FIXPOOL_ERR_RANGE = 3,
  FIXPOOL_ERR_ALIGNMENT = 4,
  FIXPOOL_ERR_DOUBLE_FREE = 5,
  FIXPOOL_ERR_CORRUPTION = 6,
  FIXPOOL_ERR_GROW_UNSUPPORTED = 7,
  FIXPOOL_ERR_SHRINK_BLOCKED = 8,
  FIXPOOL_ERR_ROUTING = 9,
  FIXPOOL_ERR_COMPARISON = 10,
  FIXPOOL_ERR_FILE = 11,
  FIXPOOL_ERR_PRECONDITION = 12,
  FIXPOOL_ERR_INVALID_ARGUMENT = 13,
  FIXPOOL_ERR_BUFFER_TOO_SMALL = 14,
  FIXPOOL_ERR_INTERNAL = 15
} fixpool_status;

FIXPOOL_API const char* fixpool_status_string(fixpool_status status);

/* Message for the last failing call on this thread; "" if none. */
FIXPOOL_API const char* fixpool_last_error(void);

/* ---- fixed-size pool ---------------------------------------------------- */

typedef struct fixpool_pool fixpool_pool;

typedef struct fixpool_stats {
  uint64_t block_count;
  uint64_t free_count;
  uint64_t initialized_count;
  size_t block_size_bytes;
} fixpool_stats;

FIXPOOL_API fixpool_status fixpool_create(size_t block_size_bytes,
                                          uint64_t block_count,
                                          fixpool_pool** out);
/* Reserves room for max_block_count blocks so the pool can grow in place. */
FIXPOOL_API fixpool_status fixpool_create_resizable(size_t block_size_bytes,
                                                    uint64_t block_count,
                                                    uint64_t max_block_count,
                                                    fixpool_pool** out);
FIXPOOL_API void fixpool_destroy(fixpool_pool* pool);

/* *out is NULL when the pool is exhausted; that is not an error. */
FIXPOOL_API fixpool_status fixpool_allocate(fixpool_pool* pool, void** out);
FIXPOOL_API fixpool_status fixpool_deallocate(fixpool_pool* pool, void* block);

FIXPOOL_API fixpool_status fixpool_addr_from_index(const fixpool_pool* pool,
                                                   uint64_t index, void** out);
FIXPOOL_API fixpool_status fixpool_index_from_addr(const fixpool_pool* pool,
                                                   const void* block,
                                                   uint32_t* out);
FIXPOOL_API fixpool_status fixpool_get_stats(const fixpool_pool* pool,
                                             fixpool_stats* out);

FIXPOOL_API fixpool_status fixpool_grow(fixpool_pool* pool,
                                        uint64_t new_block_count);
FIXPOOL_API fixpool_status fixpool_shrink(fixpool_pool* pool,
                                          uint64_t new_block_count);
FIXPOOL_API fixpool_status fixpool_high_water_mark(const fixpool_pool* pool,
                                                   uint64_t* out);

/* ---- debug pool --------------------------------------------------------- */

typedef struct fixpool_debug_pool fixpool_debug_pool;

enum {
  FIXPOOL_CHECK_RANGE = 1u << 0,
  FIXPOOL_CHECK_ALIGNMENT = 1u << 1,
  FIXPOOL_CHECK_DOUBLE_FREE = 1u << 2,
  FIXPOOL_CHECK_GUARDS = 1u << 3,
  FIXPOOL_CHECK_LEAKS = 1u << 4,
  FIXPOOL_CHECK_ALL = (1u << 5) - 1
};

typedef struct fixpool_guard_config {
  size_t guard_size_bytes;
  uint8_t guard_pattern;
  unsigned enabled_checks;
} fixpool_guard_config;

/* 4-byte 0xFD guards, every check enabled. */
FIXPOOL_API fixpool_guard_config fixpool_default_guard_config(void);

#define FIXPOOL_TAG_CAPACITY 64

typedef enum fixpool_guard_side {
  FIXPOOL_SIDE_FRONT = 0,
  FIXPOOL_SIDE_REAR = 1
} fixpool_guard_side;

/* Guard violation (side meaningful) or leaked allocation (side ignored).
 * Tags longer than FIXPOOL_TAG_CAPACITY - 1 bytes are truncated. */
typedef struct fixpool_finding {
  uint32_t block_index;
  fixpool_guard_side side;
  char tag[FIXPOOL_TAG_CAPACITY];
} fixpool_finding;

/* config may be NULL for the defaults. */
FIXPOOL_API fixpool_status fixpool_debug_create(
    size_t payload_size, uint64_t block_count,
    const fixpool_guard_config* config, fixpool_debug_pool** out);
FIXPOOL_API void fixpool_debug_destroy(fixpool_debug_pool* pool);

FIXPOOL_API fixpool_status fixpool_debug_allocate(fixpool_debug_pool* pool,
                                                  const char* tag, void** out);
/* On FIXPOOL_ERR_CORRUPTION, *finding (if not NULL) names the damaged guard. */
FIXPOOL_API fixpool_status fixpool_debug_deallocate(fixpool_debug_pool* pool,
                                                    void* payload,
                                                    fixpool_finding* finding);

/* Both report functions write up to capacity entries and set *count to the
 * total number found; FIXPOOL_ERR_BUFFER_TOO_SMALL if it exceeds capacity. */
FIXPOOL_API fixpool_status fixpool_debug_check_guards(
    const fixpool_debug_pool* pool, fixpool_finding* findings, size_t capacity,
    size_t* count);
FIXPOOL_API fixpool_status fixpool_debug_leak_report(
    const fixpool_debug_pool* pool, fixpool_finding* leaks, size_t capacity,
    size_t* count);

/* ---- multi-pool --------------------------------------------------------- */

typedef struct fixpool_multipool fixpool_multipool;

typedef struct fixpool_tier {
  size_t block_size_bytes;
  uint64_t block_count;
} fixpool_tier;

FIXPOOL_API fixpool_status fixpool_multi_create(const fixpool_tier* tiers,
                                                size_t tier_count,
                                                double waste_factor,
                                                fixpool_multipool** out);
FIXPOOL_API void fixpool_multi_destroy(fixpool_multipool* pool);

FIXPOOL_API fixpool_status fixpool_multi_alloc(fixpool_multipool* pool,
                                               size_t size, void** out);
FIXPOOL_API fixpool_status fixpool_multi_free(fixpool_multipool* pool,
                                              void* address);

/* tier_stats may be NULL when capacity is 0; *tier_count receives the number
 * of tiers. */
FIXPOOL_API fixpool_status fixpool_multi_stats(const fixpool_multipool* pool,
                                               fixpool_stats* tier_stats,
                                               size_t capacity,
                                               size_t* tier_count,
                                               uint64_t* fallback_count);

/* ---- benchmark ---------------------------------------------------------- */

typedef enum fixpool_bench_allocator {
  FIXPOOL_BENCH_POOL = 0,
  FIXPOOL_BENCH_SYSTEM = 1
} fixpool_bench_allocator;

typedef enum fixpool_bench_pattern {
  FIXPOOL_BENCH_BULK = 0,
  FIXPOOL_BENCH_PAIRS = 1,
  FIXPOOL_BENCH_CHURN = 2
} fixpool_bench_pattern;

typedef struct fixpool_bench_plan {
  fixpool_bench_allocator allocator;
  const size_t* block_sizes;
  size_t block_size_count;
  const uint64_t* op_counts;
  size_t op_count_count;
  fixpool_bench_pattern pattern;
  uint32_t repetitions;
  int has_seed;
  uint64_t seed;
} fixpool_bench_plan;

typedef struct fixpool_bench_report fixpool_bench_report;

/* Runs the plan. A failed cell does not fail the call; see failure_count. */
FIXPOOL_API fixpool_status fixpool_bench_run(const fixpool_bench_plan* plan,
                                             fixpool_bench_report** out);
FIXPOOL_API void fixpool_bench_report_destroy(fixpool_bench_report* report);

FIXPOOL_API size_t fixpool_bench_row_count(const fixpool_bench_report* report);
FIXPOOL_API size_t
fixpool_bench_failure_count(const fixpool_bench_report* report);
/* Description of failure i, valid until the report is destroyed. */
FIXPOOL_API const char* fixpool_bench_failure(
    const fixpool_bench_report* report, size_t i);

/* Appends the rows of src to dst. */
FIXPOOL_API fixpool_status fixpool_bench_report_append(
    fixpool_bench_report* dst, const fixpool_bench_report* src);

FIXPOOL_API fixpool_status fixpool_bench_write_csv(
    const fixpool_bench_report* report, const char* path);
FIXPOOL_API fixpool_status fixpool_bench_read_csv(const char* path,
                                                  fixpool_bench_report** out);

typedef struct fixpool_speedup {
  size_t block_size;
  fixpool_bench_pattern pattern;
  uint64_t op_count;
  double pool_ns_per_op;
  double system_ns_per_op;
  double ratio;
} fixpool_speedup;

/* Median-based system/pool ratios per cell; same capacity/count contract as
 * the debug reports. */
FIXPOOL_API fixpool_status fixpool_bench_compare(
    const fixpool_bench_report* pool_report,
    const fixpool_bench_report* system_report, fixpool_speedup* out,
    size_t capacity, size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* FIXPOOL_FIXPOOL_H_ */
