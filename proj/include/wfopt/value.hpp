#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wfopt/attrs.hpp"

namespace wfopt {

enum class ValueKind { Integer, NullableInteger, Text };

/// A single cell. NULLs compare equal to each other and sort after any
/// non-NULL value, under both ascending and descending order.
struct Value {
  enum class Tag : uint8_t { Null, Int, Str } tag = Tag::Null;
  int64_t num = 0;
  std::string str;

  static Value null() { return Value{}; }
  static Value of(int64_t v) { return Value{Tag::Int, v, {}}; }
  static Value of(std::string s) { return Value{Tag::Str, 0, std::move(s)}; }

  bool is_null() const { return tag == Tag::Null; }

  bool operator==(const Value &o) const {
    if (tag != o.tag)
      return false;
    switch (tag) {
    case Tag::Null:
      return true;
    case Tag::Int:
      return num == o.num;
    case Tag::Str:
      return str == o.str;
    }
    return false;
  }
  bool operator!=(const Value &o) const { return !(*this == o); }

  std::string to_string() const;
};

/// -1 / 0 / +1 under ascending order with NULLs last. `desc` flips the
/// non-NULL comparison only; NULLs stay last either way.
int compare_values(const Value &a, const Value &b, bool desc);

/// One tuple. `rowid` is the position in the original scan and is the
/// ultimate tie-break in every sort, which makes all reorderings
/// deterministic and window results plan-independent.
struct Row {
  std::vector<Value> vals;
  uint64_t rowid = 0;
};

/// Ordered column list. Column names are unique.
class Schema {
public:
  struct Column {
    AttrId id;
    ValueKind kind;
  };

  Schema() = default;
  explicit Schema(std::vector<Column> cols);

  size_t size() const { return cols_.size(); }
  const Column &operator[](size_t i) const { return cols_[i]; }
  const std::vector<Column> &columns() const { return cols_; }

  bool has(const AttrId &a) const;
  /// Index of a column; throws InvalidArgument when absent.
  size_t index_of(const AttrId &a) const;

  Schema with_column(const AttrId &id, ValueKind kind) const;

private:
  std::vector<Column> cols_;
};

/// Compiled comparator for a key sequence over a fixed schema.
class RowComparator {
public:
  RowComparator() = default;
  RowComparator(const Schema &schema, const AttrSeq &key);

  /// -1 / 0 / +1 on the key columns only.
  int compare_key(const Row &a, const Row &b) const;
  /// Key order with rowid tie-break: a strict weak ordering that is total.
  bool operator()(const Row &a, const Row &b) const {
    int c = compare_key(a, b);
    return c != 0 ? c < 0 : a.rowid < b.rowid;
  }
  bool key_equal(const Row &a, const Row &b) const {
    return compare_key(a, b) == 0;
  }
  bool empty() const { return parts_.empty(); }

  /// Weak integer pre-key for the first key column: code(a) < code(b)
  /// implies a sorts before b; equal codes fall back to compare_key.
  /// Lets sort inner loops run on plain integers for the common case.
  int64_t sort_code(const Row &r) const {
    if (parts_.empty())
      return 0;
    const Value &v = r.vals[parts_[0].col];
    if (v.tag != Value::Tag::Int)
      return std::numeric_limits<int64_t>::max(); // NULLs last; text punts
    return parts_[0].desc ? ~v.num : v.num;
  }

private:
  struct Part {
    size_t col;
    bool desc;
  };
  std::vector<Part> parts_;
};

/// Projection of the key columns of one row; used for group detection.
std::vector<Value> project(const Row &r, const std::vector<size_t> &cols);

/// Column indexes for a set/sequence of attributes.
std::vector<size_t> column_indexes(const Schema &schema, const AttrSet &attrs);
std::vector<size_t> column_indexes(const Schema &schema, const AttrSeq &seq);

} // namespace wfopt
