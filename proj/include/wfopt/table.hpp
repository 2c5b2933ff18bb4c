#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "wfopt/memory.hpp"
#include "wfopt/order_algebra.hpp"
#include "wfopt/stream.hpp"

namespace wfopt {

/// Everything known about a stored table: shape, physical order, and the
/// statistics the planner consumes. Lives in a JSON sidecar next to the
/// data file.
struct TableMeta {
  Schema schema;
  uint64_t rows = 0;
  uint64_t blocks = 0;
  size_t row_width = 0;
  size_t block_bytes = kDefaultBlockBytes;
  SegProp prop; // physical order of the stored rows
  std::map<std::string, double> distinct;
  uint64_t seed = 0;
  std::string order_directive = "none"; // none | sorted:<attr> | grouped:<attr>

  std::string to_json() const;
  static TableMeta from_json(const std::string &text);
};

std::filesystem::path sidecar_path(const std::filesystem::path &data);
void write_sidecar(const std::filesystem::path &data, const TableMeta &meta);
TableMeta read_sidecar(const std::filesystem::path &data);

/// Fixed-width binary table file: rows never straddle the 8 KiB blocks,
/// each integer column is a tag byte plus an 8-byte value. Text columns
/// are not representable here; they stay in CSV land.
class TableWriter {
public:
  TableWriter(const std::filesystem::path &path, const Schema &schema,
              size_t block_bytes = kDefaultBlockBytes);
  ~TableWriter();
  void append(const Row &r);
  /// Flushes and returns (rows, blocks).
  std::pair<uint64_t, uint64_t> finish();
  static size_t row_width(const Schema &schema);

private:
  void flush_block();
  std::FILE *out_;
  std::filesystem::path path_;
  size_t block_bytes_;
  size_t row_width_;
  size_t cols_;
  std::vector<char> block_;
  uint64_t rows_ = 0;
  uint64_t blocks_ = 0;
  bool finished_ = false;
};

/// Streams a binary table file, counting block reads into ctx.io and
/// assigning sequential rowids. Segment starts are synthesized from the
/// declared order property the same way VecStream does it.
RowStreamPtr scan_table(const std::filesystem::path &path,
                        const TableMeta &meta, RunContext &ctx);

/// CSV with a header line; empty cells are NULLs. Column kinds are
/// inferred: all-integer columns become nullable integers, anything else
/// text.
std::pair<Schema, std::vector<Row>> read_csv(const std::filesystem::path &path);
void write_csv(const std::filesystem::path &path, const Schema &schema,
               const std::vector<Row> &rows);

} // namespace wfopt
