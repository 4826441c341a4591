#include "fixpool/fixpool.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <utility>

#include "fixpool/bench.hpp"
#include "fixpool/debug_pool.hpp"
#include "fixpool/multipool.hpp"
#include "fixpool/pool.hpp"

struct fixpool_pool {
  fixpool::Pool pool;
};

struct fixpool_debug_pool {
  fixpool::DebugPool pool;
};

struct fixpool_multipool {
  fixpool::MultiPool pool;
};

struct fixpool_bench_report {
  fixpool::bench::BenchReport report;
  std::vector<std::string> failure_text;
};

namespace {

thread_local std::string last_error;

fixpool_status to_status(fixpool::ErrorKind kind) {
  using fixpool::ErrorKind;
  switch (kind) {
    case ErrorKind::kConfig: return FIXPOOL_ERR_CONFIG;
    case ErrorKind::kOutOfMemory: return FIXPOOL_ERR_OUT_OF_MEMORY;
    case ErrorKind::kRange: return FIXPOOL_ERR_RANGE;
    case ErrorKind::kAlignment: return FIXPOOL_ERR_ALIGNMENT;
    case ErrorKind::kDoubleFree: return FIXPOOL_ERR_DOUBLE_FREE;
    case ErrorKind::kCorruption: return FIXPOOL_ERR_CORRUPTION;
    case ErrorKind::kGrowUnsupported: return FIXPOOL_ERR_GROW_UNSUPPORTED;
    case ErrorKind::kShrinkBlocked: return FIXPOOL_ERR_SHRINK_BLOCKED;
    case ErrorKind::kRouting: return FIXPOOL_ERR_ROUTING;
    case ErrorKind::kComparison: return FIXPOOL_ERR_COMPARISON;
    case ErrorKind::kFile: return FIXPOOL_ERR_FILE;
    case ErrorKind::kPrecondition: return FIXPOOL_ERR_PRECONDITION;
  }
  return FIXPOOL_ERR_INTERNAL;
}

fixpool_status fail(fixpool_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into status codes.
template <class Body>
fixpool_status guarded(Body&& body) noexcept {
  try {
    body();
    return FIXPOOL_OK;
  } catch (const fixpool::Error& error) {
    return fail(to_status(error.kind()), error.what());
  } catch (const std::bad_alloc&) {
    return fail(FIXPOOL_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& error) {
    return fail(FIXPOOL_ERR_INTERNAL, error.what());
  } catch (...) {
    return fail(FIXPOOL_ERR_INTERNAL, "unknown exception");
  }
}

fixpool_status null_argument() {
  return fail(FIXPOOL_ERR_INVALID_ARGUMENT, "required pointer argument is NULL");
}

void copy_tag(const std::string& tag, char (&out)[FIXPOOL_TAG_CAPACITY]) {
  const std::size_t n = std::min(tag.size(), sizeof out - 1);
  std::memcpy(out, tag.data(), n);
  out[n] = '\0';
}

fixpool_finding to_finding(const fixpool::GuardFinding& finding) {
  fixpool_finding out{};
  out.block_index = finding.block_index;
  out.side = finding.side == fixpool::GuardSide::kFront ? FIXPOOL_SIDE_FRONT
                                                        : FIXPOOL_SIDE_REAR;
  copy_tag(finding.tag, out.tag);
  return out;
}

template <class T, class Out>
fixpool_status copy_out(const std::vector<T>& items, Out* out,
                        std::size_t capacity, std::size_t* count,
                        fixpool_finding (*convert)(const T&)) {
  *count = items.size();
  if (out == nullptr && capacity > 0) return null_argument();
  const std::size_t n = std::min(capacity, items.size());
  for (std::size_t i = 0; i < n; ++i) out[i] = convert(items[i]);
  if (items.size() > capacity) {
    return fail(FIXPOOL_ERR_BUFFER_TOO_SMALL, "output buffer too small");
  }
  return FIXPOOL_OK;
}

fixpool_stats to_c(const fixpool::PoolStats& s) {
  return fixpool_stats{s.block_count, s.free_count, s.initialized_count,
                       s.block_size_bytes};
}

fixpool::bench::Pattern to_cpp(fixpool_bench_pattern pattern) {
  switch (pattern) {
    case FIXPOOL_BENCH_BULK: return fixpool::bench::Pattern::kBulk;
    case FIXPOOL_BENCH_PAIRS: return fixpool::bench::Pattern::kPairs;
    case FIXPOOL_BENCH_CHURN: return fixpool::bench::Pattern::kChurn;
  }
  throw fixpool::Error(fixpool::ErrorKind::kConfig, "unknown bench pattern");
}

fixpool_bench_pattern to_c(fixpool::bench::Pattern pattern) {
  switch (pattern) {
    case fixpool::bench::Pattern::kPairs: return FIXPOOL_BENCH_PAIRS;
    case fixpool::bench::Pattern::kChurn: return FIXPOOL_BENCH_CHURN;
    default: return FIXPOOL_BENCH_BULK;
  }
}

void refresh_failures(fixpool_bench_report& handle) {
  handle.failure_text.clear();
  for (const auto& f : handle.report.failures) {
    handle.failure_text.push_back(
        "block_size=" + std::to_string(f.block_size) +
        " op_count=" + std::to_string(f.op_count) +
        " repetition=" + std::to_string(f.repetition) + ": " + f.reason);
  }
}

}  // namespace

extern "C" {

const char* fixpool_status_string(fixpool_status status) {
  switch (status) {
    case FIXPOOL_OK: return "ok";
    case FIXPOOL_ERR_CONFIG: return "configuration error";
    case FIXPOOL_ERR_OUT_OF_MEMORY: return "out of memory";
    case FIXPOOL_ERR_RANGE: return "range error";
    case FIXPOOL_ERR_ALIGNMENT: return "alignment error";
    case FIXPOOL_ERR_DOUBLE_FREE: return "double free";
    case FIXPOOL_ERR_CORRUPTION: return "corruption";
    case FIXPOOL_ERR_GROW_UNSUPPORTED: return "grow unsupported";
    case FIXPOOL_ERR_SHRINK_BLOCKED: return "shrink blocked";
    case FIXPOOL_ERR_ROUTING: return "routing error";
    case FIXPOOL_ERR_COMPARISON: return "comparison error";
    case FIXPOOL_ERR_FILE: return "file error";
    case FIXPOOL_ERR_PRECONDITION: return "precondition violation";
    case FIXPOOL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FIXPOOL_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case FIXPOOL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* fixpool_last_error(void) { return last_error.c_str(); }

// ---- pool -------------------------------------------------------------------

fixpool_status fixpool_create(size_t block_size_bytes, uint64_t block_count,
                              fixpool_pool** out) {
  return fixpool_create_resizable(block_size_bytes, block_count, block_count,
                                  out);
}

fixpool_status fixpool_create_resizable(size_t block_size_bytes,
                                        uint64_t block_count,
                                        uint64_t max_block_count,
                                        fixpool_pool** out) {
  if (out == nullptr) return null_argument();
  *out = nullptr;
  return guarded([&] {
    *out = new fixpool_pool{
        fixpool::Pool(fixpool::PoolConfig{block_size_bytes, block_count},
                      fixpool::GrowCapacity{max_block_count})};
  });
}

void fixpool_destroy(fixpool_pool* pool) { delete pool; }

fixpool_status fixpool_allocate(fixpool_pool* pool, void** out) {
  if (pool == nullptr || out == nullptr) return null_argument();
  *out = pool->pool.allocate_address();
  return FIXPOOL_OK;
}

fixpool_status fixpool_deallocate(fixpool_pool* pool, void* block) {
  if (pool == nullptr) return null_argument();
  return guarded([&] { pool->pool.deallocate(block); });
}

fixpool_status fixpool_addr_from_index(const fixpool_pool* pool, uint64_t index,
                                       void** out) {
  if (pool == nullptr || out == nullptr) return null_argument();
  return guarded([&] { *out = pool->pool.addr_from_index(index); });
}

fixpool_status fixpool_index_from_addr(const fixpool_pool* pool,
                                       const void* block, uint32_t* out) {
  if (pool == nullptr || out == nullptr) return null_argument();
  return guarded([&] { *out = pool->pool.index_from_addr(block); });
}

fixpool_status fixpool_get_stats(const fixpool_pool* pool, fixpool_stats* out) {
  if (pool == nullptr || out == nullptr) return null_argument();
  *out = to_c(pool->pool.stats());
  return FIXPOOL_OK;
}

fixpool_status fixpool_grow(fixpool_pool* pool, uint64_t new_block_count) {
  if (pool == nullptr) return null_argument();
  return guarded([&] { pool->pool.grow(new_block_count); });
}

fixpool_status fixpool_shrink(fixpool_pool* pool, uint64_t new_block_count) {
  if (pool == nullptr) return null_argument();
  return guarded([&] { pool->pool.shrink(new_block_count); });
}

fixpool_status fixpool_high_water_mark(const fixpool_pool* pool,
                                       uint64_t* out) {
  if (pool == nullptr || out == nullptr) return null_argument();
  *out = pool->pool.high_water_mark();
  return FIXPOOL_OK;
}

// ---- debug pool -------------------------------------------------------------

fixpool_guard_config fixpool_default_guard_config(void) {
  const fixpool::GuardConfig defaults;
  return fixpool_guard_config{defaults.guard_size_bytes, defaults.guard_pattern,
                              static_cast<unsigned>(defaults.enabled_checks)};
}

fixpool_status fixpool_debug_create(size_t payload_size, uint64_t block_count,
                                    const fixpool_guard_config* config,
                                    fixpool_debug_pool** out) {
  if (out == nullptr) return null_argument();
  *out = nullptr;
  const fixpool_guard_config c =
      config != nullptr ? *config : fixpool_default_guard_config();
  if ((c.enabled_checks & ~static_cast<unsigned>(FIXPOOL_CHECK_ALL)) != 0) {
    return fail(FIXPOOL_ERR_INVALID_ARGUMENT, "unknown check flags");
  }
  return guarded([&] {
    *out = new fixpool_debug_pool{fixpool::DebugPool(
        payload_size, block_count,
        fixpool::GuardConfig{c.guard_size_bytes, c.guard_pattern,
                             static_cast<fixpool::Check>(c.enabled_checks)})};
  });
}

void fixpool_debug_destroy(fixpool_debug_pool* pool) { delete pool; }

fixpool_status fixpool_debug_allocate(fixpool_debug_pool* pool, const char* tag,
                                      void** out) {
  if (pool == nullptr || out == nullptr) return null_argument();
  return guarded(
      [&] { *out = pool->pool.allocate_tagged(tag != nullptr ? tag : ""); });
}

fixpool_status fixpool_debug_deallocate(fixpool_debug_pool* pool, void* payload,
                                        fixpool_finding* finding) {
  if (pool == nullptr) return null_argument();
  try {
    pool->pool.deallocate_checked(payload);
    return FIXPOOL_OK;
  } catch (const fixpool::CorruptionError& error) {
    if (finding != nullptr) *finding = to_finding(error.finding());
    return fail(FIXPOOL_ERR_CORRUPTION, error.what());
  } catch (const fixpool::Error& error) {
    return fail(to_status(error.kind()), error.what());
  }
}

fixpool_status fixpool_debug_check_guards(const fixpool_debug_pool* pool,
                                          fixpool_finding* findings,
                                          size_t capacity, size_t* count) {
  if (pool == nullptr || count == nullptr) return null_argument();
  fixpool_status status = FIXPOOL_OK;
  const fixpool_status outer = guarded([&] {
    status = copy_out(pool->pool.check_all_guards(), findings, capacity, count,
                      &to_finding);
  });
  return outer != FIXPOOL_OK ? outer : status;
}

fixpool_status fixpool_debug_leak_report(const fixpool_debug_pool* pool,
                                         fixpool_finding* leaks,
                                         size_t capacity, size_t* count) {
  if (pool == nullptr || count == nullptr) return null_argument();
  auto convert = [](const fixpool::AllocationRecord& record) {
    fixpool_finding out{};
    out.block_index = record.block_index;
    out.side = FIXPOOL_SIDE_FRONT;
    copy_tag(record.tag, out.tag);
    return out;
  };
  fixpool_status status = FIXPOOL_OK;
  const fixpool_status outer = guarded([&] {
    status = copy_out(pool->pool.leak_report(), leaks, capacity, count,
                      +convert);
  });
  return outer != FIXPOOL_OK ? outer : status;
}

// ---- multi-pool -------------------------------------------------------------

fixpool_status fixpool_multi_create(const fixpool_tier* tiers,
                                    size_t tier_count, double waste_factor,
                                    fixpool_multipool** out) {
  if (out == nullptr || (tiers == nullptr && tier_count > 0)) {
    return null_argument();
  }
  *out = nullptr;
  return guarded([&] {
    fixpool::MultiPoolConfig config;
    config.waste_factor = waste_factor;
    for (size_t i = 0; i < tier_count; ++i) {
      config.tiers.push_back({tiers[i].block_size_bytes, tiers[i].block_count});
    }
    *out = new fixpool_multipool{fixpool::MultiPool(config)};
  });
}

void fixpool_multi_destroy(fixpool_multipool* pool) { delete pool; }

fixpool_status fixpool_multi_alloc(fixpool_multipool* pool, size_t size,
                                   void** out) {
  if (pool == nullptr || out == nullptr) return null_argument();
  *out = nullptr;
  return guarded([&] { *out = pool->pool.alloc(size); });
}

fixpool_status fixpool_multi_free(fixpool_multipool* pool, void* address) {
  if (pool == nullptr) return null_argument();
  return guarded([&] { pool->pool.free(address); });
}

fixpool_status fixpool_multi_stats(const fixpool_multipool* pool,
                                   fixpool_stats* tier_stats, size_t capacity,
                                   size_t* tier_count,
                                   uint64_t* fallback_count) {
  if (pool == nullptr || tier_count == nullptr) return null_argument();
  if (tier_stats == nullptr && capacity > 0) return null_argument();
  const auto stats = pool->pool.stats();
  *tier_count = stats.tiers.size();
  if (fallback_count != nullptr) *fallback_count = stats.fallback_count;
  const size_t n = std::min(capacity, stats.tiers.size());
  for (size_t i = 0; i < n; ++i) tier_stats[i] = to_c(stats.tiers[i]);
  if (stats.tiers.size() > capacity) {
    return fail(FIXPOOL_ERR_BUFFER_TOO_SMALL, "output buffer too small");
  }
  return FIXPOOL_OK;
}

// ---- benchmark --------------------------------------------------------------

fixpool_status fixpool_bench_run(const fixpool_bench_plan* plan,
                                 fixpool_bench_report** out) {
  if (plan == nullptr || out == nullptr) return null_argument();
  if ((plan->block_sizes == nullptr && plan->block_size_count > 0) ||
      (plan->op_counts == nullptr && plan->op_count_count > 0)) {
    return null_argument();
  }
  *out = nullptr;
  return guarded([&] {
    fixpool::bench::BenchPlan p;
    p.allocator = plan->allocator == FIXPOOL_BENCH_SYSTEM
                      ? fixpool::bench::AllocatorKind::kSystem
                      : fixpool::bench::AllocatorKind::kPool;
    p.block_sizes.assign(plan->block_sizes,
                         plan->block_sizes + plan->block_size_count);
    p.op_counts.assign(plan->op_counts, plan->op_counts + plan->op_count_count);
    p.pattern = to_cpp(plan->pattern);
    p.repetitions = plan->repetitions;
    if (plan->has_seed) p.seed = plan->seed;
    auto handle = std::make_unique<fixpool_bench_report>();
    handle->report = fixpool::bench::run_plan(p);
    refresh_failures(*handle);
    *out = handle.release();
  });
}

void fixpool_bench_report_destroy(fixpool_bench_report* report) {
  delete report;
}

size_t fixpool_bench_row_count(const fixpool_bench_report* report) {
  return report != nullptr ? report->report.rows.size() : 0;
}

size_t fixpool_bench_failure_count(const fixpool_bench_report* report) {
  return report != nullptr ? report->failure_text.size() : 0;
}

const char* fixpool_bench_failure(const fixpool_bench_report* report,
                                  size_t i) {
  if (report == nullptr || i >= report->failure_text.size()) return nullptr;
  return report->failure_text[i].c_str();
}

fixpool_status fixpool_bench_report_append(fixpool_bench_report* dst,
                                           const fixpool_bench_report* src) {
  if (dst == nullptr || src == nullptr) return null_argument();
  return guarded([&] {
    auto& rows = dst->report.rows;
    rows.insert(rows.end(), src->report.rows.begin(), src->report.rows.end());
    auto& failures = dst->report.failures;
    failures.insert(failures.end(), src->report.failures.begin(),
                    src->report.failures.end());
    refresh_failures(*dst);
  });
}

fixpool_status fixpool_bench_write_csv(const fixpool_bench_report* report,
                                       const char* path) {
  if (report == nullptr || path == nullptr) return null_argument();
  return guarded([&] { fixpool::bench::emit_csv(report->report, path); });
}

fixpool_status fixpool_bench_read_csv(const char* path,
                                      fixpool_bench_report** out) {
  if (path == nullptr || out == nullptr) return null_argument();
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<fixpool_bench_report>();
    handle->report = fixpool::bench::read_csv(std::filesystem::path(path));
    *out = handle.release();
  });
}

fixpool_status fixpool_bench_compare(const fixpool_bench_report* pool_report,
                                     const fixpool_bench_report* system_report,
                                     fixpool_speedup* out, size_t capacity,
                                     size_t* count) {
  if (pool_report == nullptr || system_report == nullptr || count == nullptr) {
    return null_argument();
  }
  if (out == nullptr && capacity > 0) return null_argument();
  fixpool_status status = FIXPOOL_OK;
  const fixpool_status outer = guarded([&] {
    const auto speedups =
        fixpool::bench::compare(pool_report->report, system_report->report);
    *count = speedups.size();
    const size_t n = std::min(capacity, speedups.size());
    for (size_t i = 0; i < n; ++i) {
      const auto& s = speedups[i];
      out[i] = fixpool_speedup{s.block_size,       to_c(s.pattern),
                               s.op_count,         s.pool_ns_per_op,
                               s.system_ns_per_op, s.ratio};
    }
    if (speedups.size() > capacity) {
      status = fail(FIXPOOL_ERR_BUFFER_TOO_SMALL, "output buffer too small");
    }
  });
  return outer != FIXPOOL_OK ? outer : status;
}

}  // extern "C"
