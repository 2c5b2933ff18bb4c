#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "wfopt/order_algebra.hpp"

namespace wfopt {

/// Statistics a reorder-cost estimate needs: relation size in blocks and
/// rows, distinct counts, the segment count of the incoming stream, and
/// the memory budget / merge fan-in.
struct RelStats {
  double b_blocks = 1;   // relation size in blocks
  double t_rows = 1;     // relation size in rows
  double k_segments = 1; // segments of the incoming stream
  double m_blocks = 3;   // memory budget for one reorder operation
  double merge_order = 2; // runs merged at once

  /// Known distinct counts per single attribute.
  std::map<std::string, double> distinct_attr;
  /// Optional exact counts for whole key sets, by sorted attr names.
  std::map<std::vector<std::string>, double> distinct_set;

  /// Distinct count of a key set: exact when recorded, otherwise the
  /// product of per-attribute counts capped at the row count (independent
  /// uniform attributes assumed). Unknown attributes count as t_rows.
  double distinct(const AttrSet &key) const;
  double distinct(const AttrSeq &key) const { return distinct(key.attr_set()); }
};

struct CostEstimate {
  double io_blocks = 0;
};

/// External merge sort: one run-formation pass plus merge passes, two
/// block transfers each. Runs come out at twice the memory budget via
/// replacement selection, so B <= 2M sorts in a single pass.
CostEstimate cost_fs(const RelStats &s);

/// Hash partitioning then per-bucket sort. Buckets that fit in memory sort
/// for free (pipelined); larger ones pay the external-sort price. The
/// partition pass only touches buckets that spill.
CostEstimate cost_hs(const RelStats &s, const AttrSet &whk);

/// Segmented sort: k*u units, each B/(k*u) blocks; in-memory units are
/// free, larger ones pay the external-sort price.
CostEstimate cost_ss(const RelStats &s, const AttrSeq &alpha, const AttrSet &x);

enum class ReorderKind { None, Fs, Hs, Ss };
const char *to_string(ReorderKind k);

struct ReorderChoice {
  ReorderKind kind = ReorderKind::None;
  CostEstimate cost;
};

/// Cheapest applicable operator; cost ties prefer SS, then HS, then FS
/// (the cheaper operators also do less comparison work per row).
ReorderChoice compare_ops(const std::vector<ReorderChoice> &applicable);

} // namespace wfopt
