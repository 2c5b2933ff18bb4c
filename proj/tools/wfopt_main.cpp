#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wfopt/bench.hpp"

using namespace wfopt;

namespace {

GenSpec parse_columns(const std::string &cols, GenSpec spec) {
  if (cols.empty())
    return spec;
  spec.columns.clear();
  std::stringstream ss(cols);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto pos = item.find(':');
    if (pos == std::string::npos)
      throw CLI::ValidationError("--cols", "expected name:distinct[,...]");
    spec.columns.emplace_back(item.substr(0, pos),
                              std::stoull(item.substr(pos + 1)));
  }
  return spec;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"window-function evaluation engine"};
  app.require_subcommand(1);

  // ---- gen
  auto *gen = app.add_subcommand("gen", "generate a synthetic table");
  std::string gen_out = "data.tbl", gen_cols, gen_order = "none",
              gen_order_attr;
  uint64_t gen_rows = 100000, gen_seed = 1;
  size_t gen_block = kDefaultBlockBytes;
  gen->add_option("--out", gen_out, "output table path");
  gen->add_option("--rows", gen_rows, "row count");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--cols", gen_cols, "columns as name:distinct,...");
  gen->add_option("--order", gen_order, "none | sorted | grouped");
  gen->add_option("--order-attr", gen_order_attr, "attribute for --order");
  gen->add_option("--block-bytes", gen_block, "block size in bytes");

  // ---- plan / run / verify share most options
  std::string spec_path, data_override, scheme_override, tmp_dir;
  size_t mem_override = 0;
  size_t block_override = 0;
  std::string out_path, report_path;
  bool no_validate = false;
  std::string verify_schemes_arg = "cso,bfo,orcl,psql";

  auto add_common = [&](CLI::App *cmd, bool with_out) {
    cmd->add_option("--spec", spec_path, "workload spec (json)")->required();
    cmd->add_option("--data", data_override, "override the spec's table path");
    cmd->add_option("--scheme", scheme_override,
                    "override scheme: cso | bfo | orcl | psql");
    cmd->add_option("--mem-blocks", mem_override, "memory budget in blocks");
    cmd->add_option("--block-bytes", block_override, "block size in bytes");
    cmd->add_option("--tmp-dir", tmp_dir, "spill directory");
    if (with_out) {
      cmd->add_option("--out", out_path, "result rows (csv)");
      cmd->add_option("--report", report_path, "run report (json)");
      cmd->add_flag("--no-validate", no_validate,
                    "skip order-property validation");
    }
  };

  auto *plan_cmd = app.add_subcommand("plan", "plan a workload");
  add_common(plan_cmd, false);
  auto *run_cmd = app.add_subcommand("run", "plan and execute a workload");
  add_common(run_cmd, true);
  auto *verify_cmd =
      app.add_subcommand("verify", "run several schemes and diff results");
  add_common(verify_cmd, false);
  verify_cmd->add_option("--schemes", verify_schemes_arg,
                         "comma-separated schemes to compare");

  // ---- bench
  auto *bench_cmd = app.add_subcommand("bench", "run a benchmark suite");
  std::string suite;
  BenchOptions bopt;
  std::string bench_out, bench_data_dir = "bench-data", bench_tmp;
  bench_cmd->add_option("--suite", suite,
                        "micro-fs-hs | micro-ss | q6..q9 | overhead")
      ->required();
  bench_cmd->add_option("--rows", bopt.rows, "table rows");
  bench_cmd->add_option("--seed", bopt.seed, "random seed");
  bench_cmd->add_option("--data-dir", bench_data_dir, "table cache directory");
  bench_cmd->add_option("--out", bench_out, "csv output (default stdout)");
  bench_cmd->add_option("--tmp-dir", bench_tmp, "spill directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      GenSpec spec = parse_columns(gen_cols, default_gen_spec(gen_rows, gen_seed));
      spec.rows = gen_rows;
      spec.seed = gen_seed;
      spec.order = gen_order;
      spec.order_attr = gen_order_attr;
      spec.block_bytes = gen_block;
      auto meta = gen_data(spec, gen_out);
      std::cout << "wrote " << meta.rows << " rows in " << meta.blocks
                << " blocks to " << gen_out << "\n";
      return 0;
    }

    auto load_spec = [&]() {
      WorkloadSpec spec = load_workload_spec(spec_path);
      if (!data_override.empty())
        spec.table = data_override;
      if (!scheme_override.empty())
        spec.scheme = scheme_override;
      if (mem_override)
        spec.mem_blocks = mem_override;
      if (block_override)
        spec.block_bytes = block_override;
      if (no_validate)
        spec.validate = false;
      return spec;
    };

    if (*plan_cmd) {
      auto spec = load_spec();
      auto report = plan_workload(spec);
      std::cout << report.plan_text << "\n" << report.plan_json << "\n";
      return 0;
    }
    if (*run_cmd) {
      auto spec = load_spec();
      std::filesystem::path out = out_path;
      auto report =
          run_workload(spec, tmp_dir, out_path.empty() ? nullptr : &out);
      if (!report_path.empty()) {
        std::ofstream rf(report_path);
        rf << report.to_json() << "\n";
      }
      std::cout << report.plan_text << "\n"
                << "rows=" << report.result_rows
                << " est_cost=" << report.est_cost
                << " spill_blocks=" << report.spill_blocks
                << " wall_ms=" << report.wall_ms << "\n";
      return 0;
    }
    if (*verify_cmd) {
      auto spec = load_spec();
      std::vector<std::string> schemes;
      std::stringstream ss(verify_schemes_arg);
      std::string s;
      while (std::getline(ss, s, ','))
        if (!s.empty())
          schemes.push_back(s);
      auto mismatch = verify_schemes(spec, schemes, tmp_dir);
      if (mismatch) {
        std::cerr << "MISMATCH: " << *mismatch << "\n";
        return 1;
      }
      std::cout << "all schemes agree\n";
      return 0;
    }
    if (*bench_cmd) {
      bopt.data_dir = bench_data_dir;
      bopt.out_csv = bench_out;
      bopt.tmp_dir = bench_tmp;
      bench_suite(suite, bopt);
      return 0;
    }
  } catch (const InvalidArgument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
