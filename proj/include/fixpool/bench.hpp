#pragma once

// Allocation benchmark harness: times allocate/deallocate workloads on the
// fixed-size pool and on the system allocator (malloc/free), and reads and
// writes the results as CSV.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fixpool::bench {

enum class AllocatorKind { kPool, kSystem };

/// kCreate is a pseudo-pattern: pool creation plus teardown time for a cell.
enum class Pattern { kBulk, kPairs, kChurn, kCreate };

const char* to_string(AllocatorKind kind) noexcept;
const char* to_string(Pattern pattern) noexcept;
std::optional<AllocatorKind> parse_allocator(std::string_view text);
std::optional<Pattern> parse_pattern(std::string_view text);

struct BenchPlan {
  AllocatorKind allocator = AllocatorKind::kPool;
  std::vector<std::size_t> block_sizes;
  std::vector<std::uint64_t> op_counts;
  Pattern pattern = Pattern::kBulk;
  std::uint32_t repetitions = 1;
  std::optional<std::uint64_t> seed;
};

/// Throws Error{kConfig} for empty grids, zero counts, a churn plan without a
/// seed, pool blocks smaller than an index, or kCreate as the pattern.
void validate(const BenchPlan& plan);

struct BenchRow {
  AllocatorKind allocator = AllocatorKind::kPool;
  std::size_t block_size = 0;
  Pattern pattern = Pattern::kBulk;
  std::uint64_t op_count = 0;
  std::uint64_t total_ns = 0;
  double ns_per_op = 0.0;
  std::uint32_t repetition = 0;

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

struct CellFailure {
  std::size_t block_size = 0;
  std::uint64_t op_count = 0;
  std::uint32_t repetition = 0;
  std::string reason;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<CellFailure> failures;
};

/// One churn step. Frees pick live_slot in the array of live blocks, which is
/// compacted by moving its last element into the hole.
struct ChurnOp {
  bool allocate = false;
  std::uint32_t live_slot = 0;

  friend bool operator==(const ChurnOp&, const ChurnOp&) = default;
};

struct ChurnSequence {
  std::uint64_t capacity = 0;
  std::uint64_t prefill = 0;
  std::vector<ChurnOp> ops;
};

/// Random mix at roughly half occupancy of `capacity` blocks. Depends only on
/// the arguments, never on the allocator that will replay it.
ChurnSequence make_churn_sequence(std::uint64_t capacity, std::uint64_t ops,
                                  std::uint64_t seed);

BenchReport run_plan(const BenchPlan& plan);

struct Speedup {
  std::size_t block_size = 0;
  Pattern pattern = Pattern::kBulk;
  std::uint64_t op_count = 0;
  double pool_ns_per_op = 0.0;
  double system_ns_per_op = 0.0;
  double ratio = 0.0;  // system / pool, medians over repetitions
};

/// Pairs up the pool rows of `pool_report` with the system rows of
/// `system_report` per (block_size, pattern, op_count); create rows are
/// ignored. Throws Error{kComparison} when the cell sets differ.
std::vector<Speedup> compare(const BenchReport& pool_report,
                             const BenchReport& system_report);

double median(std::vector<double> values);

inline constexpr std::string_view kCsvHeader =
    "allocator,block_size,pattern,op_count,total_ns,ns_per_op,repetition";

void write_csv(const BenchReport& report, std::ostream& out);
/// Throws Error{kPrecondition} on an empty report, Error{kFile} if the
/// destination cannot be written.
void emit_csv(const BenchReport& report, const std::filesystem::path& path);
BenchReport read_csv(std::istream& in);
BenchReport read_csv(const std::filesystem::path& path);

}  // namespace fixpool::bench
