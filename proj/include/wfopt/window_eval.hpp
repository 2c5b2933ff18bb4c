#pragma once

#include "wfopt/order_algebra.hpp"
#include "wfopt/stream.hpp"

namespace wfopt {

/// Evaluates one window function over a stream whose order already matches
/// it, appending the result into column `out_col` (which must exist and is
/// overwritten). Partition boundaries are changes of the partition-key
/// value in stream order. Rank semantics:
///   rank        1 + rows strictly ahead in ordering-key order (gaps)
///   dense_rank  distinct ordering-key values seen so far
///   row_number  position under (ordering key, original rowid) — ties are
///               broken by rowid so the numbering is plan-independent
///   sum         whole-partition total of the argument, NULLs ignored,
///               NULL when the partition has no non-NULL argument
/// Order properties and segment flags pass through unchanged.
RowStreamPtr eval_window(RowStreamPtr in, const WindowFunc &wf,
                         size_t out_col);

} // namespace wfopt
