#include "wfopt/bench.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace wfopt {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

AttrSeq seq_from_spec(const nlohmann::json &arr) {
  std::vector<AttrKey> keys;
  for (const auto &e : arr) {
    if (e.is_string())
      keys.emplace_back(e.get<std::string>());
    else
      keys.emplace_back(e.at("attr").get<std::string>(),
                        e.value("desc", false));
  }
  return AttrSeq(std::move(keys));
}

} // namespace

WorkloadSpec workload_spec_from_json(const std::string &text,
                                     const std::filesystem::path &base_dir) {
  auto j = nlohmann::json::parse(text);
  WorkloadSpec spec;
  std::filesystem::path table = j.at("table").get<std::string>();
  spec.table = table.is_absolute() ? table : base_dir / table;
  spec.scheme = j.value("scheme", std::string("cso"));
  spec.mem_blocks = j.value("mem_blocks", size_t(64));
  if (j.contains("block_bytes"))
    spec.block_bytes = j["block_bytes"].get<size_t>();
  spec.validate = j.value("validate", true);

  std::vector<WindowFunc> wfs;
  for (const auto &w : j.at("window_functions")) {
    AttrSeq part = w.contains("partition") ? seq_from_spec(w["partition"])
                                           : AttrSeq{};
    AttrSeq order = w.contains("order") ? seq_from_spec(w["order"]) : AttrSeq{};
    auto kind = wf_kind_from_string(w.value("kind", std::string("rank")));
    if (!kind)
      throw InvalidArgument("unknown window function kind in spec");
    AttrId arg;
    if (*kind == WfKind::Sum)
      arg = AttrId(w.at("arg").get<std::string>());
    wfs.push_back(WindowFunc::with_decl(part, order, *kind,
                                        w.at("name").get<std::string>(), arg));
  }
  spec.workload = Workload(std::move(wfs));

  if (j.contains("input_order")) {
    const auto &o = j["input_order"];
    std::vector<AttrId> xs;
    for (const auto &a : o.value("x", nlohmann::json::array()))
      xs.emplace_back(a.get<std::string>());
    AttrSeq y = o.contains("y") ? seq_from_spec(o["y"]) : AttrSeq{};
    spec.input_prop =
        SegProp(AttrSet(std::move(xs)), y, o.value("grouped", false));
  }
  return spec;
}

WorkloadSpec load_workload_spec(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open workload spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return workload_spec_from_json(ss.str(), path.parent_path());
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["scheme"] = scheme;
  j["plan"] = plan_text;
  j["estimated_cost"] = est_cost;
  j["planning_ms"] = plan_ms;
  j["wall_ms"] = wall_ms;
  j["result_rows"] = result_rows;
  j["spill_blocks"] = spill_blocks;
  j["scan_blocks"] = scan_blocks;
  j["merge_passes"] = merge_passes;
  j["step_spill_bytes"] = step_spill_bytes;
  return j.dump(2);
}

namespace {

struct Prepared {
  TableMeta meta;
  PlannerInput pin;
  MemoryBudget budget;
  bool csv = false;
  std::vector<Row> csv_rows; // only for CSV tables, which load in memory
};

Prepared prepare(const WorkloadSpec &spec) {
  Prepared p;
  if (spec.table.extension() == ".csv") {
    p.csv = true;
    auto [schema, rows] = read_csv(spec.table);
    p.meta.schema = schema;
    p.meta.rows = rows.size();
    p.meta.block_bytes = spec.block_bytes.value_or(kDefaultBlockBytes);
    size_t bytes = 0;
    for (const auto &r : rows)
      bytes += row_spill_bytes(r);
    p.meta.blocks = std::max<uint64_t>(1, bytes / p.meta.block_bytes);
    for (size_t c = 0; c < schema.size(); ++c) {
      std::vector<std::string> seen;
      for (const auto &r : rows)
        seen.push_back(r.vals[c].to_string());
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      p.meta.distinct[schema[c].id.name] = static_cast<double>(seen.size());
    }
    p.csv_rows = std::move(rows);
  } else {
    p.meta = read_sidecar(spec.table);
  }
  size_t bs = spec.block_bytes.value_or(p.meta.block_bytes);
  p.budget = MemoryBudget(spec.mem_blocks, bs);
  p.pin.input_prop = spec.input_prop.value_or(p.meta.prop);
  p.pin.stats.b_blocks = static_cast<double>(std::max<uint64_t>(1, p.meta.blocks));
  p.pin.stats.t_rows = static_cast<double>(std::max<uint64_t>(1, p.meta.rows));
  p.pin.stats.m_blocks = static_cast<double>(spec.mem_blocks);
  p.pin.stats.merge_order = static_cast<double>(spec.mem_blocks - 1);
  p.pin.stats.distinct_attr = p.meta.distinct;
  if (p.pin.input_prop.num_segments_hint)
    p.pin.stats.k_segments =
        static_cast<double>(*p.pin.input_prop.num_segments_hint);
  return p;
}

RunReport report_for(const WorkloadSpec &spec, const Plan &plan,
                     double plan_ms) {
  RunReport r;
  r.scheme = spec.scheme;
  r.plan_text = plan.to_text(spec.workload);
  r.plan_json = plan.to_json(spec.workload);
  r.est_cost = plan.est_total_cost;
  r.plan_ms = plan_ms;
  return r;
}

} // namespace

RunReport plan_workload(const WorkloadSpec &spec) {
  auto p = prepare(spec);
  auto t0 = std::chrono::steady_clock::now();
  Plan plan = plan_with_scheme(spec.scheme, spec.workload, p.pin);
  return report_for(spec, plan, ms_since(t0));
}

RunReport run_workload(const WorkloadSpec &spec, const std::string &tmp_dir,
                       const std::filesystem::path *result_csv,
                       std::vector<Row> *capture, Schema *out_schema_out) {
  auto p = prepare(spec);
  auto t0 = std::chrono::steady_clock::now();
  Plan plan = plan_with_scheme(spec.scheme, spec.workload, p.pin);
  double plan_ms = ms_since(t0);

  RunContext scan_ctx;
  TempDir tmp(tmp_dir);
  auto t1 = std::chrono::steady_clock::now();
  RowStreamPtr scan;
  if (p.csv)
    scan = std::make_unique<VecStream>(std::move(p.csv_rows), p.meta.schema,
                                       p.pin.input_prop);
  else
    scan = scan_table(spec.table, p.meta, scan_ctx);
  ExecOptions opts;
  opts.validate_props = spec.validate;
  auto exec =
      execute_plan(std::move(scan), plan, spec.workload, p.budget, tmp, opts);

  Schema out_schema = exec.stream->schema();
  std::optional<std::ofstream> csv;
  if (result_csv) {
    csv.emplace(*result_csv);
    if (!*csv)
      throw IoError("cannot write result file " + result_csv->string());
    for (size_t c = 0; c < out_schema.size(); ++c)
      *csv << (c ? "," : "") << out_schema[c].id.name;
    *csv << "\n";
  }

  uint64_t n = 0;
  while (auto item = exec.stream->next()) {
    ++n;
    if (csv) {
      for (size_t c = 0; c < item->row.vals.size(); ++c)
        *csv << (c ? "," : "") << item->row.vals[c].to_string();
      *csv << "\n";
    }
    if (capture)
      capture->push_back(std::move(item->row));
  }

  RunReport r = report_for(spec, plan, plan_ms);
  r.wall_ms = ms_since(t1);
  r.result_rows = n;
  auto io = exec.total_io();
  r.spill_blocks = io.spill_blocks();
  r.merge_passes = io.merge_passes;
  r.scan_blocks = scan_ctx.io.scan_blocks_read;
  for (const auto &c : *exec.step_ctx)
    r.step_spill_bytes.push_back(c.io.spill_bytes);
  if (out_schema_out)
    *out_schema_out = out_schema;
  return r;
}

std::optional<std::string>
verify_schemes(const WorkloadSpec &spec, const std::vector<std::string> &schemes,
               const std::string &tmp_dir) {
  if (schemes.size() < 2)
    throw InvalidArgument("verification needs at least two schemes");
  std::vector<std::vector<Row>> results;
  Schema schema;
  for (const auto &s : schemes) {
    WorkloadSpec ws = spec;
    ws.scheme = s;
    std::vector<Row> rows;
    run_workload(ws, tmp_dir, nullptr, &rows, &schema);
    std::sort(rows.begin(), rows.end(),
              [](const Row &a, const Row &b) { return a.rowid < b.rowid; });
    results.push_back(std::move(rows));
  }
  for (size_t s = 1; s < results.size(); ++s) {
    if (results[s].size() != results[0].size())
      return "row count differs between " + schemes[0] + " and " + schemes[s];
    for (size_t i = 0; i < results[s].size(); ++i) {
      const Row &a = results[0][i];
      const Row &b = results[s][i];
      if (a.rowid != b.rowid)
        return "row identity mismatch between " + schemes[0] + " and " +
               schemes[s];
      for (size_t c = 0; c < a.vals.size(); ++c)
        if (a.vals[c] != b.vals[c])
          return "value mismatch at rowid " + std::to_string(a.rowid) +
                 " column " + schema[c].id.name + " between " + schemes[0] +
                 " (" + a.vals[c].to_string() + ") and " + schemes[s] + " (" +
                 b.vals[c].to_string() + ")";
    }
  }
  return std::nullopt;
}

// ------------------------------------------------------------ query shapes

Workload query_workload(const std::string &name) {
  auto rank = [](AttrSeq decl, AttrSeq wok, const std::string &n) {
    return WindowFunc::with_decl(std::move(decl), std::move(wok), WfKind::Rank,
                                 n);
  };
  using S = AttrSeq;
  if (name == "q6")
    return Workload({rank(S::of({"item"}), S::of({"date"}), "wf1"),
                     rank(S::of({"item"}), S::of({"bill"}), "wf2")});
  if (name == "q7")
    return Workload({
        rank(S::of({"date", "time", "ship"}), {}, "wf1"),
        rank(S::of({"time", "date"}), {}, "wf2"),
        rank(S::of({"item"}), {}, "wf3"),
        rank({}, S::of({"item", "bill"}), "wf4"),
        rank(S::of({"date", "time", "item", "bill"}), S::of({"ship"}), "wf5"),
    });
  if (name == "q8")
    return Workload({
        rank(S::of({"date", "time", "ship"}), {}, "wf1"),
        rank(S::of({"time", "date"}), {}, "wf2"),
        rank(S::of({"item"}), {}, "wf3"),
        rank(S::of({"item"}), S::of({"bill"}), "wf4"),
        rank(S::of({"date", "time", "item"}), S::of({"bill", "ship"}), "wf5"),
    });
  if (name == "q9")
    return Workload({
        rank(S::of({"item"}), S::of({"bill", "date"}), "wf1"),
        rank(S::of({"item", "time"}), S::of({"date"}), "wf2"),
        rank(S::of({"item"}), S::of({"time"}), "wf3"),
        rank({}, S::of({"item", "date"}), "wf4"),
        rank(S::of({"bill", "date"}), S::of({"time"}), "wf5"),
        rank(S::of({"bill"}), S::of({"time"}), "wf6"),
        rank(S::of({"date", "time"}), {}, "wf7"),
        rank({}, S::of({"time"}), "wf8"),
    });
  throw InvalidArgument("unknown benchmark query: " + name);
}

GenSpec query_genspec(const std::string &name, uint64_t rows, uint64_t seed) {
  GenSpec s;
  s.rows = rows;
  s.seed = seed;
  auto d = [&](uint64_t date, uint64_t time, uint64_t ship, uint64_t item,
               uint64_t bill) {
    s.columns = {{"date", date},
                 {"time", time},
                 {"ship", ship},
                 {"item", item},
                 {"bill", bill},
                 {"quantity", 100}};
  };
  if (name == "q6")
    d(1024, 512, 512, 20000, 1024);
  else if (name == "q7")
    d(2, 2, 8, 64, 64);
  else if (name == "q8")
    d(4, 4, 8, 20000, 1024);
  else if (name == "q9")
    d(512, 512, 8, 20000, 20000);
  else
    throw InvalidArgument("unknown benchmark query: " + name);
  return s;
}

// ----------------------------------------------------------------- suites

namespace {

struct CsvSink {
  std::ofstream file;
  bool to_stdout = false;
  explicit CsvSink(const std::filesystem::path &p) {
    if (p.empty()) {
      to_stdout = true;
    } else {
      file.open(p);
      if (!file)
        throw IoError("cannot write csv " + p.string());
    }
    line("query,scheme,mem_blocks,est_cost,actual_io_blocks,wall_ms,plan");
  }
  void line(const std::string &s) {
    if (to_stdout)
      std::cout << s << "\n";
    else
      file << s << "\n";
  }
  void row(const std::string &query, const std::string &scheme, size_t m,
           double est, uint64_t io, double wall, const std::string &plan) {
    std::ostringstream os;
    os << query << "," << scheme << "," << m << "," << est << "," << io << ","
       << wall << ",\"" << plan << "\"";
    line(os.str());
  }
};

std::filesystem::path ensure_table(const BenchOptions &opt,
                                   const std::string &tag,
                                   const GenSpec &spec) {
  std::filesystem::create_directories(opt.data_dir);
  auto path = opt.data_dir / (tag + ".tbl");
  if (std::filesystem::exists(path) &&
      std::filesystem::exists(sidecar_path(path))) {
    auto meta = read_sidecar(path);
    if (meta.rows == spec.rows && meta.seed == spec.seed)
      return path;
  }
  gen_data(spec, path);
  return path;
}

/// One-step plan that forces a specific operator for a single function.
Plan forced_plan(const std::string &op, const WindowFunc &wf,
                 const PlannerInput &pin) {
  Plan plan;
  plan.scheme = op;
  plan.input_prop = pin.input_prop;
  PlanStep step;
  AttrSeq key = concat(wf.wpk_decl, wf.wok);
  if (op == "fs") {
    step.kind = ReorderKind::Fs;
    step.sort_key = key;
    step.est_cost = cost_fs(pin.stats).io_blocks;
    step.out_prop = SegProp::sorted_on(key);
  } else if (op == "hs") {
    step.kind = ReorderKind::Hs;
    step.sort_key = key;
    step.hash_key = wf.wpk;
    step.hs_buckets = hs_bucket_count(pin.stats, wf.wpk);
    step.est_cost = cost_hs(pin.stats, wf.wpk).io_blocks;
    step.out_prop = SegProp(wf.wpk, key);
  } else if (op == "ss") {
    auto t = ss_reorderable(pin.input_prop, wf);
    if (!t)
      throw InvalidArgument("segmented sort not applicable to this input");
    step.kind = ReorderKind::Ss;
    step.sort_key = t->key;
    step.ss = *t;
    step.est_cost = cost_ss(pin.stats, t->alpha, pin.input_prop.x).io_blocks;
    step.out_prop = t->output;
  } else {
    throw InvalidArgument("unknown forced operator: " + op);
  }
  step.wf_idx = {0};
  plan.steps.push_back(std::move(step));
  plan.est_total_cost = plan.steps[0].est_cost;
  return plan;
}

struct ForcedResult {
  RunReport report;
};

ForcedResult run_forced(const std::filesystem::path &table,
                        const Workload &workload, const std::string &op,
                        size_t mem_blocks, const std::string &tmp_dir) {
  WorkloadSpec spec;
  spec.table = table;
  spec.workload = workload;
  spec.mem_blocks = mem_blocks;
  spec.validate = false;

  TableMeta meta = read_sidecar(table);
  PlannerInput pin;
  pin.input_prop = meta.prop;
  pin.stats.b_blocks = static_cast<double>(std::max<uint64_t>(1, meta.blocks));
  pin.stats.t_rows = static_cast<double>(std::max<uint64_t>(1, meta.rows));
  pin.stats.m_blocks = static_cast<double>(mem_blocks);
  pin.stats.merge_order = static_cast<double>(mem_blocks - 1);
  pin.stats.distinct_attr = meta.distinct;
  if (meta.prop.num_segments_hint)
    pin.stats.k_segments = static_cast<double>(*meta.prop.num_segments_hint);

  Plan plan = forced_plan(op, workload.wfs[0], pin);

  RunContext scan_ctx;
  TempDir tmp(tmp_dir);
  auto t0 = std::chrono::steady_clock::now();
  auto scan = scan_table(table, meta, scan_ctx);
  auto exec = execute_plan(std::move(scan), plan, workload,
                           MemoryBudget(mem_blocks, meta.block_bytes), tmp,
                           ExecOptions{false});
  uint64_t n = 0;
  while (auto item = exec.stream->next())
    ++n;
  ForcedResult fr;
  fr.report.scheme = op;
  fr.report.plan_text = plan.to_text(workload);
  fr.report.est_cost = plan.est_total_cost;
  fr.report.wall_ms = ms_since(t0);
  fr.report.result_rows = n;
  fr.report.spill_blocks = exec.total_io().spill_blocks();
  return fr;
}

void micro_suite(const std::string &name, const BenchOptions &opt,
                 CsvSink &csv) {
  const bool ss_part = name == "micro-ss";
  if (!ss_part) {
    // single rank over many partitions on an unordered table
    GenSpec g;
    g.rows = opt.rows;
    g.seed = opt.seed;
    g.columns = {{"item", std::max<uint64_t>(2, opt.rows * 2 / 5)},
                 {"time", 4096},
                 {"quantity", 100}};
    auto table = ensure_table(opt, "micro_fs_hs_" + std::to_string(opt.rows),
                              g);
    auto meta = read_sidecar(table);
    Workload w({WindowFunc::with_decl(AttrSeq::of({"item"}),
                                      AttrSeq::of({"time"}), WfKind::Rank,
                                      "r")});
    // 0.1% .. 10% of the table in blocks
    for (double frac : {0.001, 0.005, 0.01, 0.05, 0.10}) {
      size_t m = std::max<size_t>(
          4, static_cast<size_t>(frac * static_cast<double>(meta.blocks)));
      for (const std::string op : {"fs", "hs"}) {
        auto fr = run_forced(table, w, op, m, opt.tmp_dir);
        csv.row("micro-fs-hs", op, m, fr.report.est_cost,
                fr.report.spill_blocks, fr.report.wall_ms,
                fr.report.plan_text);
      }
    }
    return;
  }
  // sorted and grouped inputs where the segmented sort applies
  for (const std::string arrangement : {"sorted", "grouped"}) {
    GenSpec g;
    g.rows = opt.rows;
    g.seed = opt.seed;
    g.columns = {{"quantity", 512}, {"item", 16384}, {"time", 4096}};
    g.order = arrangement;
    g.order_attr = "quantity";
    auto table = ensure_table(
        opt, "micro_ss_" + arrangement + "_" + std::to_string(opt.rows), g);
    auto meta = read_sidecar(table);
    Workload w({WindowFunc::with_decl(AttrSeq::of({"quantity"}),
                                      AttrSeq::of({"item"}), WfKind::Rank,
                                      "r")});
    for (double frac : {0.002, 0.01, 0.05}) {
      size_t m = std::max<size_t>(
          4, static_cast<size_t>(frac * static_cast<double>(meta.blocks)));
      for (const std::string op : {"fs", "hs", "ss"}) {
        auto fr = run_forced(table, w, op, m, opt.tmp_dir);
        csv.row("micro-ss-" + arrangement, op, m, fr.report.est_cost,
                fr.report.spill_blocks, fr.report.wall_ms,
                fr.report.plan_text);
      }
    }
  }
}

void query_suite(const std::string &q, const BenchOptions &opt, CsvSink &csv) {
  auto table = ensure_table(opt, q + "_" + std::to_string(opt.rows),
                            query_genspec(q, opt.rows, opt.seed));
  auto meta = read_sidecar(table);
  Workload w = query_workload(q);
  for (double frac : {0.005, 0.01, 0.02}) {
    size_t m = std::max<size_t>(
        4, static_cast<size_t>(frac * static_cast<double>(meta.blocks)));
    for (const std::string scheme : {"cso", "orcl", "psql"}) {
      WorkloadSpec spec;
      spec.table = table;
      spec.workload = w;
      spec.scheme = scheme;
      spec.mem_blocks = m;
      spec.validate = false;
      auto r = run_workload(spec, opt.tmp_dir);
      csv.row(q, scheme, m, r.est_cost, r.spill_blocks, r.wall_ms,
              r.plan_text);
    }
  }
}

void overhead_suite(const BenchOptions &opt, CsvSink &csv) {
  const std::vector<std::string> attrs = {"date", "time", "ship", "item",
                                          "bill"};
  std::mt19937_64 rng(opt.seed);
  RelStats stats;
  stats.b_blocks = 4096;
  stats.t_rows = 409600;
  stats.m_blocks = 64;
  stats.merge_order = 63;
  for (const auto &a : attrs)
    stats.distinct_attr[a] = 64;

  for (size_t n_wfs = 6; n_wfs <= 10; ++n_wfs) {
    // random partition/ordering keys over the five attributes
    std::vector<WindowFunc> wfs;
    for (size_t i = 0; i < n_wfs; ++i) {
      std::vector<std::string> pool = attrs;
      std::shuffle(pool.begin(), pool.end(), rng);
      size_t n_part = rng() % 3;       // 0..2
      size_t n_ord = 1 + rng() % 2;    // 1..2
      std::vector<AttrKey> part, ord;
      size_t p = 0;
      for (size_t k = 0; k < n_part; ++k)
        part.emplace_back(pool[p++]);
      for (size_t k = 0; k < n_ord && p < pool.size(); ++k)
        ord.emplace_back(pool[p++]);
      wfs.push_back(WindowFunc::with_decl(AttrSeq(part), AttrSeq(ord),
                                          WfKind::Rank,
                                          "w" + std::to_string(i)));
    }
    Workload w(wfs);
    PlannerInput pin;
    pin.stats = stats;

    for (const std::string scheme : {"cso", "bfo", "orcl", "psql"}) {
      if (scheme == "bfo" && n_wfs > 7)
        continue; // enumeration explodes past this size
      auto t0 = std::chrono::steady_clock::now();
      Plan plan = plan_with_scheme(scheme, w, pin);
      double ms = ms_since(t0);
      csv.row("overhead-" + std::to_string(n_wfs), scheme, 64,
              plan.est_total_cost, 0, ms, plan.to_text(w));
    }
  }
}

} // namespace

void bench_suite(const std::string &name, const BenchOptions &opt) {
  CsvSink csv(opt.out_csv);
  if (name == "micro-fs-hs" || name == "micro-ss")
    micro_suite(name, opt, csv);
  else if (name == "q6" || name == "q7" || name == "q8" || name == "q9")
    query_suite(name, opt, csv);
  else if (name == "overhead")
    overhead_suite(opt, csv);
  else
    throw InvalidArgument("unknown bench suite: " + name);
}

} // namespace wfopt
