#pragma once

#include <filesystem>
#include <optional>

#include "wfopt/datagen.hpp"
#include "wfopt/executor.hpp"
#include "wfopt/optimizer.hpp"
#include "wfopt/table.hpp"

namespace wfopt {

/// One query request: table, window functions, scheme, and budget.
/// Parsed from a JSON document.
struct WorkloadSpec {
  std::filesystem::path table;
  Workload workload;
  std::string scheme = "cso";
  size_t mem_blocks = 64;
  std::optional<size_t> block_bytes;
  std::optional<SegProp> input_prop; // defaults to the table's stored order
  bool validate = true;
};

WorkloadSpec workload_spec_from_json(const std::string &text,
                                     const std::filesystem::path &base_dir);
WorkloadSpec load_workload_spec(const std::filesystem::path &path);

struct RunReport {
  std::string scheme;
  std::string plan_text;
  std::string plan_json;
  double est_cost = 0;
  double plan_ms = 0;
  double wall_ms = 0;
  uint64_t result_rows = 0;
  uint64_t spill_blocks = 0; // spill writes + reads across all steps
  uint64_t scan_blocks = 0;
  uint64_t merge_passes = 0;
  std::vector<uint64_t> step_spill_bytes;

  std::string to_json() const;
};

/// Plans only (no execution); fills the plan/cost fields of a report.
RunReport plan_workload(const WorkloadSpec &spec);

/// Plans and executes. Result rows stream into `result_csv` when given;
/// `capture` additionally collects them in memory (small runs only).
RunReport run_workload(const WorkloadSpec &spec, const std::string &tmp_dir,
                       const std::filesystem::path *result_csv = nullptr,
                       std::vector<Row> *capture = nullptr,
                       Schema *out_schema = nullptr);

/// Runs the spec under several schemes and compares per-tuple window
/// values (joined on the original row identity). Returns an error
/// description on the first mismatch.
std::optional<std::string>
verify_schemes(const WorkloadSpec &spec, const std::vector<std::string> &schemes,
               const std::string &tmp_dir);

/// Benchmark-table workloads: q6 .. q9.
Workload query_workload(const std::string &name);
/// Data shapes the benchmark queries run on (distinct counts per query).
GenSpec query_genspec(const std::string &name, uint64_t rows, uint64_t seed);

struct BenchOptions {
  uint64_t rows = 200000;
  uint64_t seed = 42;
  std::filesystem::path data_dir = "bench-data";
  std::filesystem::path out_csv; // empty: stdout
  std::string tmp_dir;
};

/// Suites: micro-fs-hs, micro-ss, q6, q7, q8, q9, overhead. Emits one CSV
/// row (query, scheme, M, est cost, actual I/O, wall ms, plan) per
/// configuration.
void bench_suite(const std::string &name, const BenchOptions &opt);

} // namespace wfopt
