#include "fixpool/bench.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "fixpool/pool.hpp"

namespace fixpool::bench {
namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count());
}

// Maps the region's pages before timing; page-fault cost is not measured.
void prefault(const Pool& pool) {
  constexpr std::size_t kPage = 4096;
  volatile std::byte* region = pool.region_start();
  for (std::size_t off = 0; off < pool.region_bytes(); off += kPage) {
    region[off] = std::byte{0};
  }
}

// Keeps the optimizer from eliding allocate/free pairs whose result is unused.
inline void escape(void* p) { asm volatile("" : : "g"(p) : "memory"); }

struct CellFailed {
  std::string reason;
};

class PoolSource {
 public:
  explicit PoolSource(Pool& pool) : pool_(pool) {}
  void* acquire() noexcept { return pool_.allocate_address(); }
  void release(void* p) { pool_.deallocate(p); }

 private:
  Pool& pool_;
};

class SystemSource {
 public:
  explicit SystemSource(std::size_t size) : size_(size) {}
  void* acquire() noexcept { return std::malloc(size_); }
  void release(void* p) noexcept { std::free(p); }

 private:
  std::size_t size_;
};

template <class Source>
std::uint64_t time_bulk(Source& source, std::uint64_t count) {
  std::vector<void*> blocks(count, nullptr);
  std::uint64_t held = 0;
  const auto start = Clock::now();
  for (; held < count; ++held) {
    void* p = source.acquire();
    if (p == nullptr) break;
    escape(p);
    blocks[held] = p;
  }
  for (std::uint64_t i = 0; i < held; ++i) source.release(blocks[i]);
  const auto stop = Clock::now();
  if (held < count) throw CellFailed{"allocator exhausted during bulk run"};
  return elapsed_ns(start, stop);
}

template <class Source>
std::uint64_t time_pairs(Source& source, std::uint64_t count) {
  const auto start = Clock::now();
  for (std::uint64_t i = 0; i < count; ++i) {
    void* p = source.acquire();
    if (p == nullptr) throw CellFailed{"allocator exhausted during pairs run"};
    escape(p);
    source.release(p);
  }
  return elapsed_ns(start, Clock::now());
}

template <class Source>
std::uint64_t time_churn(Source& source, const ChurnSequence& sequence) {
  std::vector<void*> live;
  live.reserve(sequence.capacity);
  auto release_all = [&] {
    for (void* p : live) source.release(p);
    live.clear();
  };
  for (std::uint64_t i = 0; i < sequence.prefill; ++i) {
    void* p = source.acquire();
    if (p == nullptr) {
      release_all();
      throw CellFailed{"allocator exhausted during churn prefill"};
    }
    live.push_back(p);
  }
  bool exhausted = false;
  const auto start = Clock::now();
  for (const ChurnOp& op : sequence.ops) {
    if (op.allocate) {
      void* p = source.acquire();
      if (p == nullptr) {
        exhausted = true;
        break;
      }
      escape(p);
      live.push_back(p);
    } else {
      void* victim = live[op.live_slot];
      live[op.live_slot] = live.back();
      live.pop_back();
      source.release(victim);
    }
  }
  const auto stop = Clock::now();
  release_all();
  if (exhausted) throw CellFailed{"allocator exhausted during churn run"};
  return elapsed_ns(start, stop);
}

template <class Source>
std::uint64_t time_pattern(Source& source, Pattern pattern,
                           std::uint64_t count, const ChurnSequence* churn) {
  switch (pattern) {
    case Pattern::kBulk: return time_bulk(source, count);
    case Pattern::kPairs: return time_pairs(source, count);
    case Pattern::kChurn: return time_churn(source, *churn);
    case Pattern::kCreate: break;
  }
  throw CellFailed{"create is not a workload pattern"};
}

BenchRow make_row(AllocatorKind allocator, std::size_t size, Pattern pattern,
                  std::uint64_t count, std::uint64_t total_ns,
                  std::uint32_t repetition) {
  return BenchRow{allocator,
                  size,
                  pattern,
                  count,
                  total_ns,
                  static_cast<double>(total_ns) / static_cast<double>(count),
                  repetition};
}

template <class T>
bool parse_number(std::string_view text, T& value) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t from = 0;
  while (true) {
    const auto at = line.find(sep, from);
    fields.push_back(line.substr(from, at - from));
    if (at == std::string_view::npos) break;
    from = at + 1;
  }
  return fields;
}

}  // namespace

const char* to_string(AllocatorKind kind) noexcept {
  return kind == AllocatorKind::kPool ? "pool" : "system";
}

const char* to_string(Pattern pattern) noexcept {
  switch (pattern) {
    case Pattern::kBulk: return "bulk";
    case Pattern::kPairs: return "pairs";
    case Pattern::kChurn: return "churn";
    case Pattern::kCreate: return "create";
  }
  return "?";
}

std::optional<AllocatorKind> parse_allocator(std::string_view text) {
  if (text == "pool") return AllocatorKind::kPool;
  if (text == "system") return AllocatorKind::kSystem;
  return std::nullopt;
}

std::optional<Pattern> parse_pattern(std::string_view text) {
  for (Pattern p : {Pattern::kBulk, Pattern::kPairs, Pattern::kChurn,
                    Pattern::kCreate}) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

void validate(const BenchPlan& plan) {
  auto fail = [](const char* what) {
    detail::throw_error(ErrorKind::kConfig, what);
  };
  if (plan.block_sizes.empty()) fail("plan needs at least one block size");
  if (plan.op_counts.empty()) fail("plan needs at least one op count");
  if (plan.repetitions < 1) fail("repetitions must be >= 1");
  if (plan.pattern == Pattern::kCreate) fail("create is not a workload pattern");
  if (plan.pattern == Pattern::kChurn && !plan.seed) {
    fail("churn plans require a seed");
  }
  for (std::size_t size : plan.block_sizes) {
    if (size < 1) fail("block sizes must be >= 1");
    if (plan.allocator == AllocatorKind::kPool && size < kIndexBytes) {
      fail("pool block sizes must be >= 4");
    }
  }
  for (std::uint64_t count : plan.op_counts) {
    if (count < 1) fail("op counts must be >= 1");
    if (count > kMaxBlockCount) fail("op counts must fit a 32-bit index");
  }
}

ChurnSequence make_churn_sequence(std::uint64_t capacity, std::uint64_t ops,
                                  std::uint64_t seed) {
  ChurnSequence sequence;
  sequence.capacity = capacity;
  sequence.prefill = capacity / 2;
  sequence.ops.reserve(ops);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::uint64_t live = sequence.prefill;
  for (std::uint64_t i = 0; i < ops; ++i) {
    bool allocate;
    if (live == 0) {
      allocate = true;
    } else if (live == capacity) {
      allocate = false;
    } else {
      allocate = coin(rng);
    }
    ChurnOp op{allocate, 0};
    if (allocate) {
      ++live;
    } else {
      std::uniform_int_distribution<std::uint64_t> pick(0, live - 1);
      op.live_slot = static_cast<std::uint32_t>(pick(rng));
      --live;
    }
    sequence.ops.push_back(op);
  }
  return sequence;
}

BenchReport run_plan(const BenchPlan& plan) {
  validate(plan);
  BenchReport report;
  for (std::size_t size : plan.block_sizes) {
    for (std::uint64_t count : plan.op_counts) {
      std::optional<ChurnSequence> churn;
      if (plan.pattern == Pattern::kChurn) {
        churn = make_churn_sequence(count, count, *plan.seed);
      }
      const ChurnSequence* sequence = churn ? &*churn : nullptr;
      for (std::uint32_t rep = 1; rep <= plan.repetitions; ++rep) {
        try {
          if (plan.allocator == AllocatorKind::kSystem) {
            SystemSource source(size);
            const auto ns = time_pattern(source, plan.pattern, count, sequence);
            report.rows.push_back(make_row(plan.allocator, size, plan.pattern,
                                           count, ns, rep));
            continue;
          }
          const auto t0 = Clock::now();
          std::optional<Pool> pool(std::in_place, PoolConfig{size, count});
          const auto t1 = Clock::now();
          prefault(*pool);
          PoolSource source(*pool);
          const auto ns = time_pattern(source, plan.pattern, count, sequence);
          const auto t2 = Clock::now();
          pool.reset();
          const auto t3 = Clock::now();
          report.rows.push_back(
              make_row(plan.allocator, size, plan.pattern, count, ns, rep));
          report.rows.push_back(make_row(plan.allocator, size, Pattern::kCreate,
                                         count,
                                         elapsed_ns(t0, t1) + elapsed_ns(t2, t3),
                                         rep));
        } catch (const CellFailed& failure) {
          report.failures.push_back({size, count, rep, failure.reason});
        } catch (const Error& error) {
          report.failures.push_back({size, count, rep, error.what()});
        } catch (const std::bad_alloc&) {
          report.failures.push_back({size, count, rep, "out of memory"});
        }
      }
    }
  }
  return report;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    detail::throw_error(ErrorKind::kPrecondition, "median of no values");
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

std::vector<Speedup> compare(const BenchReport& pool_report,
                             const BenchReport& system_report) {
  using Cell = std::tuple<std::size_t, Pattern, std::uint64_t>;
  auto collect = [](const BenchReport& report, AllocatorKind kind) {
    std::map<Cell, std::vector<double>> cells;
    for (const BenchRow& row : report.rows) {
      if (row.allocator != kind || row.pattern == Pattern::kCreate) continue;
      cells[{row.block_size, row.pattern, row.op_count}].push_back(
          row.ns_per_op);
    }
    return cells;
  };
  const auto pool = collect(pool_report, AllocatorKind::kPool);
  const auto system = collect(system_report, AllocatorKind::kSystem);
  if (pool.empty()) {
    detail::throw_error(ErrorKind::kComparison, "no pool rows to compare");
  }
  if (pool.size() != system.size()) {
    detail::throw_error(ErrorKind::kComparison,
                        "reports cover different cells");
  }
  std::vector<Speedup> out;
  for (const auto& [cell, pool_values] : pool) {
    const auto it = system.find(cell);
    if (it == system.end()) {
      detail::throw_error(ErrorKind::kComparison,
                          "cell missing from the system report");
    }
    Speedup s;
    std::tie(s.block_size, s.pattern, s.op_count) = cell;
    s.pool_ns_per_op = median(pool_values);
    s.system_ns_per_op = median(it->second);
    s.ratio = s.system_ns_per_op / s.pool_ns_per_op;
    out.push_back(s);
  }
  return out;
}

void write_csv(const BenchReport& report, std::ostream& out) {
  out << kCsvHeader << '\n';
  char ns_per_op[64];
  for (const BenchRow& row : report.rows) {
    std::snprintf(ns_per_op, sizeof ns_per_op, "%.3f", row.ns_per_op);
    out << to_string(row.allocator) << ',' << row.block_size << ','
        << to_string(row.pattern) << ',' << row.op_count << ',' << row.total_ns
        << ',' << ns_per_op << ',' << row.repetition << '\n';
  }
}

void emit_csv(const BenchReport& report, const std::filesystem::path& path) {
  if (report.rows.empty()) {
    detail::throw_error(ErrorKind::kPrecondition, "cannot emit an empty report");
  }
  std::ostringstream buffer;
  write_csv(report, buffer);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    detail::throw_error(ErrorKind::kFile,
                        "cannot open " + path.string() + " for writing");
  }
  file << buffer.str();
  file.flush();
  if (!file) {
    detail::throw_error(ErrorKind::kFile, "failed writing " + path.string());
  }
}

BenchReport read_csv(std::istream& in) {
  auto malformed = [](std::size_t line_no) {
    detail::throw_error(ErrorKind::kFile,
                        "malformed CSV at line " + std::to_string(line_no));
  };
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    detail::throw_error(ErrorKind::kFile, "missing or unexpected CSV header");
  }
  BenchReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 7) malformed(line_no);
    const auto allocator = parse_allocator(fields[0]);
    const auto pattern = parse_pattern(fields[2]);
    BenchRow row;
    if (!allocator || !pattern || !parse_number(fields[1], row.block_size) ||
        !parse_number(fields[3], row.op_count) ||
        !parse_number(fields[4], row.total_ns) ||
        !parse_number(fields[5], row.ns_per_op) ||
        !parse_number(fields[6], row.repetition)) {
      malformed(line_no);
    }
    row.allocator = *allocator;
    row.pattern = *pattern;
    report.rows.push_back(row);
  }
  return report;
}

BenchReport read_csv(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    detail::throw_error(ErrorKind::kFile, "cannot open " + path.string());
  }
  return read_csv(file);
}

}  // namespace fixpool::bench
