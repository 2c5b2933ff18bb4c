#include "wfopt/datagen.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace wfopt {

GenSpec default_gen_spec(uint64_t rows, uint64_t seed) {
  GenSpec s;
  s.rows = rows;
  s.seed = seed;
  s.columns = {{"date", 2048},  {"time", 4096}, {"ship", 2048},
               {"item", 16384}, {"bill", 8192}, {"quantity", 100}};
  return s;
}

TableMeta gen_data(const GenSpec &spec, const std::filesystem::path &out) {
  if (spec.columns.empty())
    throw InvalidArgument("generator needs at least one column");
  for (const auto &[name, d] : spec.columns)
    if (d < 1)
      throw InvalidArgument("distinct count must be >= 1 for " + name);
  if (spec.order != "none" && spec.order != "sorted" && spec.order != "grouped")
    throw InvalidArgument("unknown order directive: " + spec.order);

  std::vector<Schema::Column> cols;
  for (const auto &[name, d] : spec.columns)
    cols.push_back({AttrId(name), ValueKind::Integer});
  Schema schema(std::move(cols));

  size_t order_col = schema.size();
  if (spec.order != "none")
    order_col = schema.index_of(AttrId(spec.order_attr));

  std::mt19937_64 rng(spec.seed);
  std::vector<Row> rows;
  rows.reserve(spec.rows);
  for (uint64_t i = 0; i < spec.rows; ++i) {
    Row r;
    r.rowid = i;
    r.vals.reserve(schema.size());
    for (const auto &[name, d] : spec.columns)
      r.vals.push_back(Value::of(static_cast<int64_t>(rng() % d)));
    rows.push_back(std::move(r));
  }

  if (spec.order == "sorted") {
    std::stable_sort(rows.begin(), rows.end(), [&](const Row &a, const Row &b) {
      return a.vals[order_col].num < b.vals[order_col].num;
    });
  } else if (spec.order == "grouped") {
    // groups in a seeded pseudo-random order, not value order
    std::unordered_map<int64_t, uint64_t> group_rank;
    std::mt19937_64 grng(spec.seed ^ 0x9e3779b97f4a7c15ull);
    for (const auto &r : rows) {
      int64_t v = r.vals[order_col].num;
      if (!group_rank.count(v))
        group_rank[v] = grng();
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const Row &a, const Row &b) {
      return group_rank[a.vals[order_col].num] <
             group_rank[b.vals[order_col].num];
    });
  }

  TableMeta meta;
  meta.schema = schema;
  meta.block_bytes = spec.block_bytes;
  meta.row_width = TableWriter::row_width(schema);
  meta.seed = spec.seed;

  TableWriter writer(out, schema, spec.block_bytes);
  for (const auto &r : rows)
    writer.append(r);
  auto [n, blocks] = writer.finish();
  meta.rows = n;
  meta.blocks = blocks;

  // exact per-attribute distinct counts
  for (size_t c = 0; c < schema.size(); ++c) {
    std::unordered_set<int64_t> seen;
    for (const auto &r : rows)
      seen.insert(r.vals[c].num);
    meta.distinct[schema[c].id.name] = static_cast<double>(seen.size());
  }

  if (spec.order == "sorted") {
    meta.prop = SegProp::sorted_on(AttrSeq({AttrKey(spec.order_attr)}));
    meta.order_directive = "sorted:" + spec.order_attr;
  } else if (spec.order == "grouped") {
    uint64_t k =
        static_cast<uint64_t>(meta.distinct[schema[order_col].id.name]);
    meta.prop = SegProp(AttrSet({AttrId(spec.order_attr)}), AttrSeq{}, true, k);
    meta.order_directive = "grouped:" + spec.order_attr;
  } else {
    meta.prop = SegProp::unordered();
    meta.order_directive = "none";
  }

  write_sidecar(out, meta);
  return meta;
}

} // namespace wfopt
