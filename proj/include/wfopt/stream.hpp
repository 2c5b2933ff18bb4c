#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <unordered_set>
#include <vector>

#include "wfopt/order_algebra.hpp"
#include "wfopt/value.hpp"

namespace wfopt {

/// One streamed tuple plus physical segment information: `segment_start`
/// is true on the first row of each segment of the stream's order
/// property. Reorder operators set it from what they physically did;
/// sources synthesize it from the declared property.
struct StreamItem {
  Row row;
  bool segment_start = false;
};

/// Pull-based row stream. Single consumer, forward only.
class RowStream {
public:
  virtual ~RowStream() = default;
  /// Next item, or nothing at end of stream.
  virtual std::optional<StreamItem> next() = 0;
  virtual const Schema &schema() const = 0;
};

using RowStreamPtr = std::unique_ptr<RowStream>;

/// Stream over an in-memory row vector with a declared order property.
/// Segment starts are synthesized: grouped streams break at each change
/// of the segment-key value, ungrouped segmented streams break where the
/// per-segment order is violated (the coarsest valid segmentation), and
/// streams with an empty segment key form a single segment.
class VecStream : public RowStream {
public:
  VecStream(std::vector<Row> rows, Schema schema, SegProp prop);
  std::optional<StreamItem> next() override;
  const Schema &schema() const override { return schema_; }

private:
  std::vector<Row> rows_;
  Schema schema_;
  SegProp prop_;
  std::vector<size_t> xcols_;
  RowComparator ycmp_;
  size_t i_ = 0;
  Row prev_;
};

/// Adapts a callback producer to a stream.
class GeneratorStream : public RowStream {
public:
  GeneratorStream(Schema schema,
                  std::function<std::optional<StreamItem>()> fn)
      : schema_(std::move(schema)), fn_(std::move(fn)) {}
  std::optional<StreamItem> next() override { return fn_(); }
  const Schema &schema() const override { return schema_; }

private:
  Schema schema_;
  std::function<std::optional<StreamItem>()> fn_;
};

/// Drains a stream into a vector (tests and small inputs only).
std::vector<Row> drain(RowStream &s);

/// Marks unit boundaries for a segmented sort: a new unit starts at every
/// change of the alpha-value, or — when alpha is empty — at every segment
/// start (change of the segment-key value for synthesized streams).
/// `unit_start` fires on the first row of each unit.
class UnitBoundaryDetector {
public:
  UnitBoundaryDetector(const Schema &schema, const AttrSet &x,
                       const AttrSeq &alpha);
  /// Feed the next item; returns true when it begins a new unit.
  bool observe(const StreamItem &item);

private:
  std::vector<size_t> xcols_;
  RowComparator alpha_cmp_;
  bool have_prev_ = false;
  Row prev_;
};

/// Streaming check that a row sequence satisfies a claimed order property.
/// Greedy: extends the current segment while the per-segment order holds,
/// forces a break otherwise, and rejects when a segment-key value recurs
/// after a forced break (for grouped claims, segments are the maximal
/// constant-key runs). Returns an error description or nothing if valid.
class SegPropValidator {
public:
  SegPropValidator(const Schema &schema, SegProp claim);
  void observe(const Row &r);
  void observe(const StreamItem &item) { observe(item.row); }
  std::optional<std::string> finish();
  bool ok() const { return !error_.has_value(); }

private:
  void fail(const std::string &msg);

  SegProp claim_;
  std::vector<size_t> xcols_;
  RowComparator ycmp_;
  bool have_prev_ = false;
  Row prev_;
  std::unordered_set<std::string> segment_values_; // x-values, current segment
  std::unordered_set<std::string> seen_values_;    // x-values, closed segments
  std::optional<std::string> error_;
  uint64_t row_no_ = 0;
};

/// Convenience: validate a full vector against a claim.
std::optional<std::string> validate_rows(const std::vector<Row> &rows,
                                         const Schema &schema,
                                         const SegProp &claim);

} // namespace wfopt
