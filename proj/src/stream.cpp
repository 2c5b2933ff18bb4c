#include "wfopt/stream.hpp"

#include <algorithm>
#include <cstring>

namespace wfopt {

VecStream::VecStream(std::vector<Row> rows, Schema schema, SegProp prop)
    : rows_(std::move(rows)), schema_(std::move(schema)), prop_(std::move(prop)),
      xcols_(column_indexes(schema_, prop_.x)),
      ycmp_(schema_, prop_.y) {}

std::optional<StreamItem> VecStream::next() {
  if (i_ >= rows_.size())
    return std::nullopt;
  StreamItem item;
  item.row = rows_[i_];
  if (i_ == 0) {
    item.segment_start = true;
  } else if (prop_.x.empty()) {
    item.segment_start = false;
  } else if (prop_.grouped) {
    item.segment_start = project(item.row, xcols_) != project(prev_, xcols_);
  } else {
    // coarsest segmentation: break only where the claimed order fails
    item.segment_start = ycmp_.compare_key(prev_, item.row) > 0;
  }
  prev_ = item.row;
  ++i_;
  return item;
}

std::vector<Row> drain(RowStream &s) {
  std::vector<Row> out;
  while (auto item = s.next())
    out.push_back(std::move(item->row));
  return out;
}

UnitBoundaryDetector::UnitBoundaryDetector(const Schema &schema,
                                           const AttrSet &x,
                                           const AttrSeq &alpha)
    : xcols_(column_indexes(schema, x)), alpha_cmp_(schema, alpha) {}

bool UnitBoundaryDetector::observe(const StreamItem &item) {
  bool start;
  if (!have_prev_) {
    start = true;
  } else if (!alpha_cmp_.empty()) {
    start = item.segment_start ||
            alpha_cmp_.compare_key(prev_, item.row) != 0;
  } else if (!xcols_.empty()) {
    start = item.segment_start ||
            project(item.row, xcols_) != project(prev_, xcols_);
  } else {
    start = item.segment_start;
  }
  prev_ = item.row;
  have_prev_ = true;
  return start;
}

namespace {

// Canonical byte encoding of a projected key, for hashed duplicate checks.
std::string encode_key(const Row &r, const std::vector<size_t> &cols) {
  std::string out;
  for (size_t c : cols) {
    const Value &v = r.vals[c];
    out.push_back(static_cast<char>(v.tag));
    if (v.tag == Value::Tag::Int) {
      char buf[8];
      std::memcpy(buf, &v.num, 8);
      out.append(buf, 8);
    } else if (v.tag == Value::Tag::Str) {
      uint32_t n = static_cast<uint32_t>(v.str.size());
      char buf[4];
      std::memcpy(buf, &n, 4);
      out.append(buf, 4);
      out += v.str;
    }
  }
  return out;
}

} // namespace

SegPropValidator::SegPropValidator(const Schema &schema, SegProp claim)
    : claim_(std::move(claim)), xcols_(column_indexes(schema, claim_.x)),
      ycmp_(schema, claim_.y) {}

void SegPropValidator::fail(const std::string &msg) {
  if (!error_)
    error_ = "row " + std::to_string(row_no_) + ": " + msg;
}

void SegPropValidator::observe(const Row &r) {
  ++row_no_;
  if (error_)
    return;
  if (!have_prev_) {
    have_prev_ = true;
    prev_ = r;
    if (!xcols_.empty())
      segment_values_.insert(encode_key(r, xcols_));
    return;
  }

  bool boundary;
  if (claim_.grouped)
    boundary = project(r, xcols_) != project(prev_, xcols_);
  else
    boundary = !xcols_.empty() && ycmp_.compare_key(prev_, r) > 0;

  if (boundary) {
    seen_values_.merge(segment_values_);
    segment_values_.clear();
  } else if (ycmp_.compare_key(prev_, r) > 0) {
    fail("per-segment order violated on " + claim_.y.to_string());
    return;
  }

  if (!xcols_.empty()) {
    auto key = encode_key(r, xcols_);
    if (!segment_values_.count(key)) {
      if (seen_values_.count(key)) {
        fail("segment-key value recurs across segments on " +
             claim_.x.to_string());
        return;
      }
      segment_values_.insert(std::move(key));
    }
  }
  prev_ = r;
}

std::optional<std::string> SegPropValidator::finish() { return error_; }

std::optional<std::string> validate_rows(const std::vector<Row> &rows,
                                         const Schema &schema,
                                         const SegProp &claim) {
  SegPropValidator v(schema, claim);
  for (const auto &r : rows)
    v.observe(r);
  return v.finish();
}

} // namespace wfopt
