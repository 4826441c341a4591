// Benchmark CLI for the fixed-size pool, built on the C API only.
//
//   bench run --allocator {pool|system|both} --sizes 16,64,256
//             --counts 1000,100000 --pattern {bulk|pairs|churn}
//             --reps N --seed S --out results.csv
//   bench compare --pool a.csv --system b.csv

#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fixpool/fixpool.h"

namespace {

struct ReportDeleter {
  void operator()(fixpool_bench_report* r) const {
    fixpool_bench_report_destroy(r);
  }
};
using ReportPtr = std::unique_ptr<fixpool_bench_report, ReportDeleter>;

int report_error(const char* what, fixpool_status status) {
  std::fprintf(stderr, "bench: %s: %s (%s)\n", what,
               fixpool_status_string(status), fixpool_last_error());
  return 2;
}

const char* pattern_name(fixpool_bench_pattern pattern) {
  switch (pattern) {
    case FIXPOOL_BENCH_BULK: return "bulk";
    case FIXPOOL_BENCH_PAIRS: return "pairs";
    case FIXPOOL_BENCH_CHURN: return "churn";
  }
  return "?";
}

int print_speedups(const fixpool_bench_report* pool,
                   const fixpool_bench_report* system) {
  std::size_t count = 0;
  fixpool_status status = fixpool_bench_compare(pool, system, nullptr, 0, &count);
  if (status != FIXPOOL_OK && status != FIXPOOL_ERR_BUFFER_TOO_SMALL) {
    return report_error("compare", status);
  }
  std::vector<fixpool_speedup> rows(count);
  status = fixpool_bench_compare(pool, system, rows.data(), rows.size(), &count);
  if (status != FIXPOOL_OK) return report_error("compare", status);

  std::printf("%10s %8s %12s %14s %14s %9s\n", "block_size", "pattern",
              "op_count", "pool_ns/op", "system_ns/op", "speedup");
  for (const auto& row : rows) {
    std::printf("%10zu %8s %12llu %14.3f %14.3f %8.2fx\n", row.block_size,
                pattern_name(row.pattern),
                static_cast<unsigned long long>(row.op_count),
                row.pool_ns_per_op, row.system_ns_per_op, row.ratio);
  }
  return 0;
}

struct RunOptions {
  std::string allocator = "pool";
  std::vector<std::size_t> sizes{16, 64, 256};
  std::vector<std::uint64_t> counts{1000, 100000};
  std::string pattern = "bulk";
  std::uint32_t reps = 3;
  std::optional<std::uint64_t> seed;
  std::string out = "results.csv";
};

int run(const RunOptions& options) {
  static const std::map<std::string, fixpool_bench_pattern> patterns{
      {"bulk", FIXPOOL_BENCH_BULK},
      {"pairs", FIXPOOL_BENCH_PAIRS},
      {"churn", FIXPOOL_BENCH_CHURN}};

  fixpool_bench_plan plan{};
  plan.block_sizes = options.sizes.data();
  plan.block_size_count = options.sizes.size();
  plan.op_counts = options.counts.data();
  plan.op_count_count = options.counts.size();
  plan.pattern = patterns.at(options.pattern);
  plan.repetitions = options.reps;
  plan.has_seed = options.seed.has_value();
  plan.seed = options.seed.value_or(0);

  std::vector<fixpool_bench_allocator> allocators;
  if (options.allocator != "system") allocators.push_back(FIXPOOL_BENCH_POOL);
  if (options.allocator != "pool") allocators.push_back(FIXPOOL_BENCH_SYSTEM);

  std::vector<ReportPtr> reports;
  for (fixpool_bench_allocator allocator : allocators) {
    plan.allocator = allocator;
    fixpool_bench_report* report = nullptr;
    const fixpool_status status = fixpool_bench_run(&plan, &report);
    if (status != FIXPOOL_OK) return report_error("run", status);
    reports.emplace_back(report);
  }

  fixpool_bench_report* combined = reports.front().get();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const fixpool_status status =
        fixpool_bench_report_append(combined, reports[i].get());
    if (status != FIXPOOL_OK) return report_error("merge", status);
  }

  const std::size_t failures = fixpool_bench_failure_count(combined);
  for (std::size_t i = 0; i < failures; ++i) {
    std::fprintf(stderr, "bench: cell failed: %s\n",
                 fixpool_bench_failure(combined, i));
  }
  if (fixpool_bench_row_count(combined) > 0) {
    const fixpool_status status =
        fixpool_bench_write_csv(combined, options.out.c_str());
    if (status != FIXPOOL_OK) return report_error("write", status);
    std::printf("wrote %zu rows to %s\n", fixpool_bench_row_count(combined),
                options.out.c_str());
  }
  if (reports.size() == 2 && failures == 0) {
    if (const int rc = print_speedups(combined, combined); rc != 0) return rc;
  }
  return failures == 0 ? 0 : 1;
}

int compare(const std::string& pool_path, const std::string& system_path) {
  fixpool_bench_report* raw = nullptr;
  fixpool_status status = fixpool_bench_read_csv(pool_path.c_str(), &raw);
  if (status != FIXPOOL_OK) return report_error("read pool report", status);
  ReportPtr pool(raw);
  status = fixpool_bench_read_csv(system_path.c_str(), &raw);
  if (status != FIXPOOL_OK) return report_error("read system report", status);
  ReportPtr system(raw);
  return print_speedups(pool.get(), system.get());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-size pool vs. system allocator benchmark"};
  app.require_subcommand(1);

  RunOptions run_options;
  auto* run_cmd = app.add_subcommand("run", "Time a benchmark plan, write CSV");
  run_cmd->add_option("--allocator", run_options.allocator)
      ->check(CLI::IsMember({"pool", "system", "both"}))
      ->capture_default_str();
  run_cmd->add_option("--sizes", run_options.sizes, "Block sizes in bytes")
      ->delimiter(',')
      ->capture_default_str();
  run_cmd->add_option("--counts", run_options.counts, "Operations per cell")
      ->delimiter(',')
      ->capture_default_str();
  run_cmd->add_option("--pattern", run_options.pattern)
      ->check(CLI::IsMember({"bulk", "pairs", "churn"}))
      ->capture_default_str();
  run_cmd->add_option("--reps", run_options.reps, "Repetitions per cell")
      ->capture_default_str();
  run_cmd->add_option("--seed", run_options.seed, "Seed for churn workloads");
  run_cmd->add_option("--out", run_options.out, "CSV destination")
      ->capture_default_str();

  std::string pool_csv;
  std::string system_csv;
  auto* compare_cmd =
      app.add_subcommand("compare", "Print speedups from two CSV reports");
  compare_cmd->add_option("--pool", pool_csv)->required();
  compare_cmd->add_option("--system", system_csv)->required();

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return run(run_options);
  return compare(pool_csv, system_csv);
}
