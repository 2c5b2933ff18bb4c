#include "wfopt/value.hpp"

#include <algorithm>

namespace wfopt {

std::string Value::to_string() const {
  switch (tag) {
  case Tag::Null:
    return "";
  case Tag::Int:
    return std::to_string(num);
  case Tag::Str:
    return str;
  }
  return "";
}

int compare_values(const Value &a, const Value &b, bool desc) {
  if (a.is_null() || b.is_null()) {
    if (a.is_null() && b.is_null())
      return 0;
    return a.is_null() ? 1 : -1; // NULLs last regardless of direction
  }
  int c = 0;
  if (a.tag == Value::Tag::Int && b.tag == Value::Tag::Int)
    c = a.num < b.num ? -1 : (a.num > b.num ? 1 : 0);
  else {
    const std::string &as = a.tag == Value::Tag::Str ? a.str : std::to_string(a.num);
    const std::string &bs = b.tag == Value::Tag::Str ? b.str : std::to_string(b.num);
    c = as < bs ? -1 : (as > bs ? 1 : 0);
  }
  return desc ? -c : c;
}

Schema::Schema(std::vector<Column> cols) : cols_(std::move(cols)) {
  for (size_t i = 0; i < cols_.size(); ++i)
    for (size_t j = i + 1; j < cols_.size(); ++j)
      if (cols_[i].id == cols_[j].id)
        throw InvalidArgument("duplicate column name: " + cols_[i].id.name);
}

bool Schema::has(const AttrId &a) const {
  return std::any_of(cols_.begin(), cols_.end(),
                     [&](const Column &c) { return c.id == a; });
}

size_t Schema::index_of(const AttrId &a) const {
  for (size_t i = 0; i < cols_.size(); ++i)
    if (cols_[i].id == a)
      return i;
  throw InvalidArgument("unknown column: " + a.name);
}

Schema Schema::with_column(const AttrId &id, ValueKind kind) const {
  auto cols = cols_;
  cols.push_back({id, kind});
  return Schema(std::move(cols));
}

RowComparator::RowComparator(const Schema &schema, const AttrSeq &key) {
  parts_.reserve(key.size());
  for (const auto &k : key)
    parts_.push_back({schema.index_of(k.attr), k.desc});
}

int RowComparator::compare_key(const Row &a, const Row &b) const {
  for (const auto &p : parts_) {
    int c = compare_values(a.vals[p.col], b.vals[p.col], p.desc);
    if (c != 0)
      return c;
  }
  return 0;
}

std::vector<Value> project(const Row &r, const std::vector<size_t> &cols) {
  std::vector<Value> out;
  out.reserve(cols.size());
  for (size_t c : cols)
    out.push_back(r.vals[c]);
  return out;
}

std::vector<size_t> column_indexes(const Schema &schema, const AttrSet &attrs) {
  std::vector<size_t> out;
  out.reserve(attrs.size());
  for (const auto &a : attrs)
    out.push_back(schema.index_of(a));
  return out;
}

std::vector<size_t> column_indexes(const Schema &schema, const AttrSeq &seq) {
  std::vector<size_t> out;
  out.reserve(seq.size());
  for (const auto &k : seq)
    out.push_back(schema.index_of(k.attr));
  return out;
}

} // namespace wfopt
