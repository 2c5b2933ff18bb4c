#include "wfopt/table.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wfopt {

namespace {

const char *kind_name(ValueKind k) {
  switch (k) {
  case ValueKind::Integer:
    return "int";
  case ValueKind::NullableInteger:
    return "int?";
  case ValueKind::Text:
    return "text";
  }
  return "?";
}

ValueKind kind_from(const std::string &s) {
  if (s == "int")
    return ValueKind::Integer;
  if (s == "int?")
    return ValueKind::NullableInteger;
  if (s == "text")
    return ValueKind::Text;
  throw InvalidArgument("unknown column kind: " + s);
}

nlohmann::json seq_json(const AttrSeq &seq) {
  auto arr = nlohmann::json::array();
  for (const auto &k : seq) {
    nlohmann::json e;
    e["attr"] = k.attr.name;
    if (k.desc)
      e["desc"] = true;
    arr.push_back(std::move(e));
  }
  return arr;
}

AttrSeq seq_from_json(const nlohmann::json &arr) {
  std::vector<AttrKey> keys;
  for (const auto &e : arr)
    keys.emplace_back(e.at("attr").get<std::string>(), e.value("desc", false));
  return AttrSeq(std::move(keys));
}

} // namespace

std::string TableMeta::to_json() const {
  nlohmann::json j;
  auto cols = nlohmann::json::array();
  for (const auto &c : schema.columns())
    cols.push_back({{"name", c.id.name}, {"kind", kind_name(c.kind)}});
  j["schema"] = cols;
  j["rows"] = rows;
  j["blocks"] = blocks;
  j["row_width"] = row_width;
  j["block_bytes"] = block_bytes;
  j["seed"] = seed;
  j["order_directive"] = order_directive;
  auto xs = nlohmann::json::array();
  for (const auto &a : prop.x)
    xs.push_back(a.name);
  j["order"] = {{"x", xs},
                {"y", seq_json(prop.y)},
                {"grouped", prop.grouped}};
  if (prop.num_segments_hint)
    j["order"]["segments"] = *prop.num_segments_hint;
  j["distinct"] = distinct;
  return j.dump(2);
}

TableMeta TableMeta::from_json(const std::string &text) {
  auto j = nlohmann::json::parse(text);
  TableMeta m;
  std::vector<Schema::Column> cols;
  for (const auto &c : j.at("schema"))
    cols.push_back({AttrId(c.at("name").get<std::string>()),
                    kind_from(c.at("kind").get<std::string>())});
  m.schema = Schema(std::move(cols));
  m.rows = j.at("rows").get<uint64_t>();
  m.blocks = j.at("blocks").get<uint64_t>();
  m.row_width = j.at("row_width").get<size_t>();
  m.block_bytes = j.value("block_bytes", kDefaultBlockBytes);
  m.seed = j.value("seed", uint64_t(0));
  m.order_directive = j.value("order_directive", std::string("none"));
  if (j.contains("order")) {
    const auto &o = j["order"];
    std::vector<AttrId> xs;
    for (const auto &a : o.at("x"))
      xs.emplace_back(a.get<std::string>());
    std::optional<uint64_t> k;
    if (o.contains("segments"))
      k = o["segments"].get<uint64_t>();
    m.prop = SegProp(AttrSet(std::move(xs)), seq_from_json(o.at("y")),
                     o.value("grouped", false), k);
  }
  if (j.contains("distinct"))
    m.distinct = j["distinct"].get<std::map<std::string, double>>();
  return m;
}

std::filesystem::path sidecar_path(const std::filesystem::path &data) {
  auto p = data;
  p += ".meta.json";
  return p;
}

void write_sidecar(const std::filesystem::path &data, const TableMeta &meta) {
  std::ofstream out(sidecar_path(data));
  if (!out)
    throw IoError("cannot write sidecar for " + data.string());
  out << meta.to_json() << "\n";
}

TableMeta read_sidecar(const std::filesystem::path &data) {
  std::ifstream in(sidecar_path(data));
  if (!in)
    throw IoError("missing sidecar " + sidecar_path(data).string());
  std::stringstream ss;
  ss << in.rdbuf();
  return TableMeta::from_json(ss.str());
}

// ------------------------------------------------------------ binary table

size_t TableWriter::row_width(const Schema &schema) {
  for (const auto &c : schema.columns())
    if (c.kind == ValueKind::Text)
      throw InvalidArgument("text column cannot go into a binary table: " +
                            c.id.name);
  return schema.size() * 9;
}

TableWriter::TableWriter(const std::filesystem::path &path,
                         const Schema &schema, size_t block_bytes)
    : path_(path), block_bytes_(block_bytes), row_width_(row_width(schema)),
      cols_(schema.size()) {
  if (row_width_ == 0 || row_width_ > block_bytes_)
    throw InvalidArgument("row width incompatible with block size");
  out_ = std::fopen(path.c_str(), "wb");
  if (!out_)
    throw IoError("cannot create table file " + path.string());
  block_.reserve(block_bytes_);
}

TableWriter::~TableWriter() {
  if (out_)
    std::fclose(out_);
}

void TableWriter::flush_block() {
  if (block_.empty())
    return;
  block_.resize(block_bytes_, 0);
  if (std::fwrite(block_.data(), 1, block_bytes_, out_) != block_bytes_)
    throw IoError("table write failed: " + path_.string());
  ++blocks_;
  block_.clear();
}

void TableWriter::append(const Row &r) {
  if (r.vals.size() != cols_)
    throw InvalidArgument("row width mismatch");
  if (block_.size() + row_width_ > block_bytes_)
    flush_block();
  for (const auto &v : r.vals) {
    block_.push_back(static_cast<char>(v.tag));
    char buf[8] = {0};
    if (v.tag == Value::Tag::Int)
      std::memcpy(buf, &v.num, 8);
    else if (v.tag == Value::Tag::Str)
      throw InvalidArgument("text value in binary table");
    block_.insert(block_.end(), buf, buf + 8);
  }
  ++rows_;
}

std::pair<uint64_t, uint64_t> TableWriter::finish() {
  if (!finished_) {
    flush_block();
    std::fflush(out_);
    finished_ = true;
  }
  return {rows_, blocks_};
}

namespace {

class TableScanStream : public RowStream {
public:
  TableScanStream(const std::filesystem::path &path, const TableMeta &meta,
                  RunContext &ctx)
      : schema_(meta.schema), meta_(meta), ctx_(ctx),
        xcols_(column_indexes(schema_, meta.prop.x)),
        ycmp_(schema_, meta.prop.y), rows_per_block_(meta.block_bytes / meta.row_width) {
    in_ = std::fopen(path.c_str(), "rb");
    if (!in_)
      throw IoError("cannot open table file " + path.string());
    block_.resize(meta.block_bytes);
  }
  ~TableScanStream() override {
    if (in_)
      std::fclose(in_);
  }

  std::optional<StreamItem> next() override {
    if (emitted_ >= meta_.rows)
      return std::nullopt;
    if (block_row_ >= rows_in_block_) {
      size_t got = std::fread(block_.data(), 1, meta_.block_bytes, in_);
      if (got < meta_.row_width)
        return std::nullopt;
      ctx_.io.scan_blocks_read++;
      rows_in_block_ = std::min<uint64_t>(got / meta_.row_width,
                                          meta_.rows - emitted_);
      block_row_ = 0;
    }
    StreamItem item;
    item.row = decode(block_row_);
    item.row.rowid = emitted_;
    ++block_row_;
    ++emitted_;
    if (emitted_ == 1) {
      item.segment_start = true;
    } else if (meta_.prop.x.empty()) {
      item.segment_start = false;
    } else if (meta_.prop.grouped) {
      item.segment_start =
          project(item.row, xcols_) != project(prev_, xcols_);
    } else {
      item.segment_start = ycmp_.compare_key(prev_, item.row) > 0;
    }
    prev_ = item.row;
    return item;
  }
  const Schema &schema() const override { return schema_; }

private:
  Row decode(uint64_t idx) const {
    Row r;
    r.vals.reserve(schema_.size());
    const char *p = block_.data() + idx * meta_.row_width;
    for (size_t c = 0; c < schema_.size(); ++c) {
      Value v;
      v.tag = static_cast<Value::Tag>(p[0]);
      if (v.tag == Value::Tag::Int)
        std::memcpy(&v.num, p + 1, 8);
      else
        v.tag = Value::Tag::Null;
      r.vals.push_back(std::move(v));
      p += 9;
    }
    return r;
  }

  Schema schema_;
  TableMeta meta_;
  RunContext &ctx_;
  std::vector<size_t> xcols_;
  RowComparator ycmp_;
  uint64_t rows_per_block_;
  std::FILE *in_ = nullptr;
  std::vector<char> block_;
  uint64_t rows_in_block_ = 0;
  uint64_t block_row_ = 0;
  uint64_t emitted_ = 0;
  Row prev_;
};

} // namespace

RowStreamPtr scan_table(const std::filesystem::path &path,
                        const TableMeta &meta, RunContext &ctx) {
  return std::make_unique<TableScanStream>(path, meta, ctx);
}

// -------------------------------------------------------------------- CSV

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_int(const std::string &s, int64_t &out) {
  if (s.empty())
    return false;
  size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

} // namespace

std::pair<Schema, std::vector<Row>> read_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw IoError("empty csv " + path.string());
  auto names = split_csv_line(line);

  std::vector<std::vector<std::string>> cells;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    auto row = split_csv_line(line);
    row.resize(names.size());
    cells.push_back(std::move(row));
  }

  std::vector<Schema::Column> cols;
  std::vector<bool> is_int(names.size(), true);
  for (size_t c = 0; c < names.size(); ++c) {
    for (const auto &row : cells) {
      int64_t tmp;
      if (!row[c].empty() && !parse_int(row[c], tmp)) {
        is_int[c] = false;
        break;
      }
    }
    cols.push_back({AttrId(names[c]),
                    is_int[c] ? ValueKind::NullableInteger : ValueKind::Text});
  }
  Schema schema(std::move(cols));

  std::vector<Row> rows;
  rows.reserve(cells.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    Row r;
    r.rowid = i;
    for (size_t c = 0; c < names.size(); ++c) {
      const auto &cell = cells[i][c];
      if (cell.empty())
        r.vals.push_back(Value::null());
      else if (is_int[c]) {
        int64_t v = 0;
        parse_int(cell, v);
        r.vals.push_back(Value::of(v));
      } else {
        r.vals.push_back(Value::of(cell));
      }
    }
    rows.push_back(std::move(r));
  }
  return {std::move(schema), std::move(rows)};
}

void write_csv(const std::filesystem::path &path, const Schema &schema,
               const std::vector<Row> &rows) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  for (size_t c = 0; c < schema.size(); ++c)
    out << (c ? "," : "") << schema[c].id.name;
  out << "\n";
  for (const auto &r : rows) {
    for (size_t c = 0; c < r.vals.size(); ++c)
      out << (c ? "," : "") << r.vals[c].to_string();
    out << "\n";
  }
}

} // namespace wfopt
