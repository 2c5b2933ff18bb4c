#pragma once

#include <algorithm>
#include <memory>

#include "wfopt/memory.hpp"
#include "wfopt/spill.hpp"
#include "wfopt/stream.hpp"

namespace wfopt {

/// External merge sort with replacement-selection run formation. Runs come
/// out at about twice the working space on random input; merging is
/// (M-1)-way with one block reserved for output. Inputs that fit in the
/// working space sort in memory with no spill at all.
///
/// Push all rows, call finish(), then pull the sorted stream. Rows are
/// ordered by the key with the original rowid as final tie-break.
class ExternalSorter {
public:
  ExternalSorter(const Schema &schema, const AttrSeq &key,
                 const MemoryBudget &budget, TempDir &tmp, RunContext &ctx);
  ~ExternalSorter();

  void push(Row r);
  void finish();
  std::optional<Row> pull();

  /// Runs written during formation (1 when the input sorted in memory).
  size_t runs_created() const { return initial_runs_ + in_memory_run_; }
  size_t merge_levels() const { return merge_levels_; }

private:
  struct HeapEntry {
    Row row;
    uint64_t run;
    int64_t code; // first-key pre-key, see RowComparator::sort_code
  };
  struct KWay;

  bool heap_later(const HeapEntry &a, const HeapEntry &b) const;
  void start_spilling();
  void pop_to_run();
  void merge_to_fanin();

  Schema schema_;
  RowComparator cmp_;
  MemoryBudget budget_;
  TempDir &tmp_;
  RunContext &ctx_;

  size_t workspace_bytes_;
  size_t bytes_ = 0;
  std::vector<HeapEntry> heap_;
  bool spilling_ = false;
  bool finished_ = false;
  uint64_t cur_run_ = 0;
  bool have_last_out_ = false;
  Row last_out_;
  int64_t last_code_ = 0;
  std::unique_ptr<SpillFile> run_out_;
  std::vector<std::unique_ptr<SpillFile>> runs_;
  size_t initial_runs_ = 0;
  size_t merge_levels_ = 0;
  size_t in_memory_run_ = 0; // 1 when the input never spilled

  // output side
  std::vector<Row> mem_rows_;
  size_t mem_pos_ = 0;
  std::unique_ptr<KWay> kway_;
};

/// Full sort: totally orders the input on sort_key. Output order property
/// is ({}, sort_key); the whole output is one segment.
RowStreamPtr full_sort(RowStreamPtr in, const AttrSeq &sort_key,
                       const MemoryBudget &budget, TempDir &tmp,
                       RunContext &ctx);

struct HashedSortResult {
  RowStreamPtr stream;
  /// True when every bucket held a single hash-key value; filled in as the
  /// stream is consumed and meaningful after the build phase (first next()).
  std::shared_ptr<bool> grouped;
};

/// Spilled hash partitions write through sub-block staging chunks so the
/// partition count can usefully exceed the block budget, the way buffered
/// per-partition appends behave in practice. Total staging stays within
/// (M-1) blocks regardless of the partition count.
inline constexpr size_t kHsPartitionsPerBlock = 16;
inline constexpr size_t kHsMinStagingBytes = 256;

/// Staging chunk size and the largest partition count one budget supports.
inline size_t hs_staging_bytes(const MemoryBudget &b) {
  return std::max(kHsMinStagingBytes, b.block_bytes / kHsPartitionsPerBlock);
}
inline size_t hs_max_partitions(const MemoryBudget &b) {
  return std::max<size_t>(1, (b.m_blocks - 1) * b.block_bytes /
                                 hs_staging_bytes(b));
}

/// Hashed sort: hash-partition on hash_key into at most
/// hs_max_partitions(budget) buckets, keeping as many buckets resident as
/// memory allows and flushing the largest one when it fills; then sort
/// resident buckets first, spilled ones after, each on sort_key. Output
/// property is (hash_key, sort_key), grouped when every bucket saw one key
/// value.
HashedSortResult hashed_sort(RowStreamPtr in, const AttrSet &hash_key,
                             const AttrSeq &sort_key, size_t n_buckets,
                             const MemoryBudget &budget, TempDir &tmp,
                             RunContext &ctx);

/// Segmented sort: splits the input into units (alpha-groups inside
/// segments, or whole segments when alpha is empty) and sorts each unit
/// independently on beta. Segment boundaries are preserved. Units that fit
/// in the working space sort in memory; larger ones fall back to an
/// external sort. Throws ContractViolation when the input's alpha values
/// run backwards inside a segment.
RowStreamPtr segmented_sort(RowStreamPtr in, const SegProp &input_prop,
                            const SsTarget &target, const MemoryBudget &budget,
                            TempDir &tmp, RunContext &ctx);

} // namespace wfopt
