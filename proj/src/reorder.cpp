#include "wfopt/reorder.hpp"

#include <algorithm>
#include <cstring>
#include <queue>

namespace wfopt {

namespace {

uint64_t hash_bytes(const void *data, size_t n) {
  // FNV-1a; seed-stable within a run by construction.
  const unsigned char *p = static_cast<const unsigned char *>(data);
  uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string encode_cols(const Row &r, const std::vector<size_t> &cols) {
  std::string out;
  for (size_t c : cols) {
    const Value &v = r.vals[c];
    out.push_back(static_cast<char>(v.tag));
    if (v.tag == Value::Tag::Int) {
      char tmp[8];
      std::memcpy(tmp, &v.num, 8);
      out.append(tmp, 8);
    } else if (v.tag == Value::Tag::Str) {
      out += v.str;
      out.push_back('\0');
    }
  }
  return out;
}

} // namespace

// ---------------------------------------------------------------- sorter

struct ExternalSorter::KWay {
  struct Cursor {
    std::unique_ptr<SpillFile::Reader> reader;
    Row row;
    int64_t code = 0;
    bool valid = false;
  };
  std::vector<Cursor> cursors;
  const RowComparator *cmp = nullptr;
  std::vector<size_t> heap; // indexes into cursors, min on top

  bool later(size_t a, size_t b) const {
    const Cursor &ca = cursors[a], &cb = cursors[b];
    if (ca.code != cb.code)
      return ca.code > cb.code;
    return (*cmp)(cb.row, ca.row);
  }
  void init() {
    for (size_t i = 0; i < cursors.size(); ++i)
      if (cursors[i].valid) {
        cursors[i].code = cmp->sort_code(cursors[i].row);
        heap.push_back(i);
      }
    auto by = [this](size_t a, size_t b) { return later(a, b); };
    std::make_heap(heap.begin(), heap.end(), by);
  }
  std::optional<Row> pull() {
    if (heap.empty())
      return std::nullopt;
    auto by = [this](size_t a, size_t b) { return later(a, b); };
    std::pop_heap(heap.begin(), heap.end(), by);
    size_t i = heap.back();
    heap.pop_back();
    Row out = std::move(cursors[i].row);
    if (cursors[i].reader->next(cursors[i].row)) {
      cursors[i].code = cmp->sort_code(cursors[i].row);
      heap.push_back(i);
      std::push_heap(heap.begin(), heap.end(), by);
    } else {
      cursors[i].valid = false;
      cursors[i].reader.reset(); // give the read block back right away
    }
    return out;
  }
};

ExternalSorter::ExternalSorter(const Schema &schema, const AttrSeq &key,
                               const MemoryBudget &budget, TempDir &tmp,
                               RunContext &ctx)
    : schema_(schema), cmp_(schema, key), budget_(budget), tmp_(tmp),
      ctx_(ctx),
      workspace_bytes_((budget.m_blocks - 2) * budget.block_bytes) {
  if (key.empty())
    throw InvalidArgument("sort key must be non-empty");
}

ExternalSorter::~ExternalSorter() {
  ctx_.memory.release(bytes_);
  bytes_ = 0;
}

bool ExternalSorter::heap_later(const HeapEntry &a, const HeapEntry &b) const {
  if (a.run != b.run)
    return a.run > b.run;
  if (a.code != b.code)
    return a.code > b.code;
  return cmp_(b.row, a.row);
}

void ExternalSorter::start_spilling() {
  spilling_ = true;
  auto by = [this](const HeapEntry &a, const HeapEntry &b) {
    return heap_later(a, b);
  };
  std::make_heap(heap_.begin(), heap_.end(), by);
  run_out_ = std::make_unique<SpillFile>(tmp_, ctx_, budget_.block_bytes);
}

void ExternalSorter::pop_to_run() {
  auto by = [this](const HeapEntry &a, const HeapEntry &b) {
    return heap_later(a, b);
  };
  std::pop_heap(heap_.begin(), heap_.end(), by);
  HeapEntry e = std::move(heap_.back());
  heap_.pop_back();
  if (e.run != cur_run_) {
    run_out_->finish_write();
    runs_.push_back(std::move(run_out_));
    ++initial_runs_;
    run_out_ = std::make_unique<SpillFile>(tmp_, ctx_, budget_.block_bytes);
    cur_run_ = e.run;
  }
  run_out_->append(e.row);
  last_out_ = std::move(e.row);
  last_code_ = e.code;
  have_last_out_ = true;
  size_t sz = row_spill_bytes(last_out_);
  ctx_.memory.release(sz);
  bytes_ -= std::min(bytes_, sz);
}

void ExternalSorter::push(Row r) {
  if (finished_)
    throw InvalidArgument("push after finish");
  size_t sz = row_spill_bytes(r);
  if (!spilling_ && bytes_ + sz > workspace_bytes_)
    start_spilling();
  if (spilling_) {
    // make room first so the workspace is never exceeded
    while (bytes_ + sz > workspace_bytes_ && !heap_.empty())
      pop_to_run();
  }
  uint64_t run = cur_run_;
  int64_t code = cmp_.sort_code(r);
  if (spilling_ && have_last_out_ &&
      (code < last_code_ || (code == last_code_ && cmp_(r, last_out_))))
    run = cur_run_ + 1; // too small to extend the current run
  ctx_.memory.charge(sz);
  bytes_ += sz;
  heap_.push_back({std::move(r), run, code});
  if (spilling_) {
    auto by = [this](const HeapEntry &a, const HeapEntry &b) {
      return heap_later(a, b);
    };
    std::push_heap(heap_.begin(), heap_.end(), by);
  }
}

void ExternalSorter::merge_to_fanin() {
  const size_t fanin = budget_.m_blocks - 1;
  while (runs_.size() > fanin) {
    ++merge_levels_;
    ++ctx_.io.merge_passes;
    std::vector<std::unique_ptr<SpillFile>> next;
    for (size_t base = 0; base < runs_.size(); base += fanin) {
      size_t end = std::min(base + fanin, runs_.size());
      KWay kw;
      kw.cmp = &cmp_;
      for (size_t i = base; i < end; ++i) {
        KWay::Cursor c;
        c.reader = std::make_unique<SpillFile::Reader>(*runs_[i]);
        c.valid = c.reader->next(c.row);
        kw.cursors.push_back(std::move(c));
      }
      kw.init();
      auto merged = std::make_unique<SpillFile>(tmp_, ctx_, budget_.block_bytes);
      while (auto r = kw.pull())
        merged->append(*r);
      merged->finish_write();
      kw.cursors.clear(); // close readers before dropping the inputs
      for (size_t i = base; i < end; ++i)
        runs_[i].reset();
      next.push_back(std::move(merged));
    }
    runs_ = std::move(next);
  }
}

void ExternalSorter::finish() {
  if (finished_)
    return;
  finished_ = true;
  if (!spilling_) {
    // Everything fits: plain in-memory sort, no I/O at all.
    mem_rows_.reserve(heap_.size());
    for (auto &e : heap_)
      mem_rows_.push_back(std::move(e.row));
    heap_.clear();
    std::sort(mem_rows_.begin(), mem_rows_.end(), std::ref(cmp_));
    in_memory_run_ = mem_rows_.empty() ? 0 : 1;
    return;
  }
  while (!heap_.empty())
    pop_to_run();
  run_out_->finish_write();
  runs_.push_back(std::move(run_out_));
  ++initial_runs_;
  merge_to_fanin();
  if (runs_.empty())
    return;
  if (runs_.size() > 1) {
    ++merge_levels_; // final streaming merge counts as a pass
    ++ctx_.io.merge_passes;
  }
  kway_ = std::make_unique<KWay>();
  kway_->cmp = &cmp_;
  for (auto &f : runs_) {
    KWay::Cursor c;
    c.reader = std::make_unique<SpillFile::Reader>(*f);
    c.valid = c.reader->next(c.row);
    kway_->cursors.push_back(std::move(c));
  }
  kway_->init();
}

std::optional<Row> ExternalSorter::pull() {
  if (!finished_)
    throw InvalidArgument("pull before finish");
  if (kway_)
    return kway_->pull();
  if (mem_pos_ < mem_rows_.size()) {
    Row r = std::move(mem_rows_[mem_pos_++]);
    size_t sz = row_spill_bytes(r);
    ctx_.memory.release(sz);
    bytes_ -= std::min(bytes_, sz);
    return r;
  }
  return std::nullopt;
}

// --------------------------------------------------------------- full sort

namespace {

class FullSortStream : public RowStream {
public:
  FullSortStream(RowStreamPtr in, AttrSeq key, MemoryBudget budget,
                 TempDir &tmp, RunContext &ctx)
      : in_(std::move(in)), schema_(in_->schema()),
        sorter_(schema_, key, budget, tmp, ctx) {}

  std::optional<StreamItem> next() override {
    if (!started_) {
      started_ = true;
      while (auto item = in_->next())
        sorter_.push(std::move(item->row));
      in_.reset();
      sorter_.finish();
    }
    auto r = sorter_.pull();
    if (!r)
      return std::nullopt;
    StreamItem item{std::move(*r), first_};
    first_ = false;
    return item;
  }
  const Schema &schema() const override { return schema_; }

private:
  RowStreamPtr in_;
  Schema schema_;
  ExternalSorter sorter_;
  bool started_ = false;
  bool first_ = true;
};

} // namespace

RowStreamPtr full_sort(RowStreamPtr in, const AttrSeq &sort_key,
                       const MemoryBudget &budget, TempDir &tmp,
                       RunContext &ctx) {
  return std::make_unique<FullSortStream>(std::move(in), sort_key, budget, tmp,
                                          ctx);
}

// -------------------------------------------------------------- hashed sort

namespace {

class HashedSortStream : public RowStream {
public:
  HashedSortStream(RowStreamPtr in, AttrSet hash_attrs, AttrSeq sort_key,
                   size_t n_buckets, MemoryBudget budget, TempDir &tmp,
                   RunContext &ctx, std::shared_ptr<bool> grouped_flag)
      : in_(std::move(in)), schema_(in_->schema()),
        hash_cols_(column_indexes(schema_, hash_attrs)),
        sort_key_(std::move(sort_key)), cmp_(schema_, sort_key_),
        budget_(budget), tmp_(tmp), ctx_(ctx),
        grouped_flag_(std::move(grouped_flag)) {
    if (hash_cols_.empty())
      throw InvalidArgument("hashed sort needs a non-empty hash key");
    for (const auto &a : hash_attrs)
      if (!sort_key_.contains_attr(a))
        throw InvalidArgument("hash key attr not in sort key: " + a.name);
    staging_bytes_ = hs_staging_bytes(budget);
    n_buckets_ =
        std::max<size_t>(1, std::min(n_buckets, hs_max_partitions(budget)));
    buckets_.resize(n_buckets_);
  }

  std::optional<StreamItem> next() override {
    if (!built_)
      build();
    while (true) {
      if (cur_rows_ && pos_ < cur_rows_->size()) {
        StreamItem item{std::move((*cur_rows_)[pos_++]), first_of_bucket_};
        first_of_bucket_ = false;
        if (pos_ == cur_rows_->size()) {
          cur_rows_ = nullptr;
          owned_rows_.clear();
        }
        return item;
      }
      if (cur_sorter_) {
        if (auto r = cur_sorter_->pull()) {
          StreamItem item{std::move(*r), first_of_bucket_};
          first_of_bucket_ = false;
          return item;
        }
        cur_sorter_.reset();
      }
      if (!advance_bucket())
        return std::nullopt;
    }
  }
  const Schema &schema() const override { return schema_; }

private:
  struct Bucket {
    std::vector<Row> rows;
    size_t bytes = 0;
    std::unique_ptr<SpillFile> spill;
    bool multi_value = false;
    bool has_first = false;
    std::string first_key;
  };

  void build() {
    built_ = true;
    // Resident rows plus one staging chunk per spilled bucket must stay
    // within the budget, one block being reserved for the input side.
    const size_t limit = (budget_.m_blocks - 1) * budget_.block_bytes;
    while (auto item = in_->next()) {
      Row r = std::move(item->row);
      size_t b = hash_bytes_of(r) % n_buckets_;
      Bucket &bk = buckets_[b];
      track_key(bk, r);
      if (bk.spill) {
        bk.spill->append(r);
        continue;
      }
      size_t sz = row_spill_bytes(r);
      while (resident_bytes_ + sz + spilled_count_ * staging_bytes_ > limit &&
             flush_largest()) {
      }
      if (bk.spill) { // our own bucket was just flushed
        bk.spill->append(r);
        continue;
      }
      bk.rows.push_back(std::move(r));
      bk.bytes += sz;
      ctx_.memory.charge(sz);
      resident_bytes_ += sz;
    }
    in_.reset();
    // writes are done: flush trailing blocks and give the staging back
    for (auto &bk : buckets_)
      if (bk.spill)
        bk.spill->finish_write();
    bool grouped = true;
    for (const auto &bk : buckets_)
      if (bk.multi_value)
        grouped = false;
    if (grouped_flag_)
      *grouped_flag_ = grouped;
  }

  uint64_t hash_bytes_of(const Row &r) const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void *data, size_t n) {
      const unsigned char *p = static_cast<const unsigned char *>(data);
      for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
      }
    };
    for (size_t c : hash_cols_) {
      const Value &v = r.vals[c];
      uint8_t tag = static_cast<uint8_t>(v.tag);
      mix(&tag, 1);
      if (v.tag == Value::Tag::Int)
        mix(&v.num, 8);
      else if (v.tag == Value::Tag::Str)
        mix(v.str.data(), v.str.size());
    }
    return h;
  }

  void track_key(Bucket &bk, const Row &r) {
    if (bk.multi_value)
      return;
    auto key = encode_cols(r, hash_cols_);
    if (!bk.has_first) {
      bk.has_first = true;
      bk.first_key = std::move(key);
    } else if (key != bk.first_key) {
      bk.multi_value = true;
    }
  }

  bool flush_largest() {
    size_t best = n_buckets_;
    size_t best_bytes = 0;
    for (size_t i = 0; i < n_buckets_; ++i) {
      if (!buckets_[i].spill && !buckets_[i].rows.empty() &&
          buckets_[i].bytes >= best_bytes) {
        best = i;
        best_bytes = buckets_[i].bytes;
      }
    }
    if (best == n_buckets_)
      return false; // nothing resident left to flush
    Bucket &bk = buckets_[best];
    bk.spill = std::make_unique<SpillFile>(tmp_, ctx_, budget_.block_bytes,
                                           staging_bytes_);
    for (auto &r : bk.rows)
      bk.spill->append(r);
    ctx_.memory.release(bk.bytes);
    resident_bytes_ -= bk.bytes;
    bk.rows.clear();
    bk.rows.shrink_to_fit();
    bk.bytes = 0;
    ++spilled_count_;
    return true;
  }

  bool advance_bucket() {
    // Memory-resident buckets are emitted before disk-resident ones,
    // each group in bucket-index order.
    while (phase_cursor_ < 2 * n_buckets_) {
      size_t idx = phase_cursor_ % n_buckets_;
      bool resident_phase = phase_cursor_ < n_buckets_;
      ++phase_cursor_;
      Bucket &bk = buckets_[idx];
      if (resident_phase) {
        if (bk.spill || bk.rows.empty())
          continue;
        std::sort(bk.rows.begin(), bk.rows.end(), std::ref(cmp_));
        owned_rows_ = std::move(bk.rows);
        bk.rows = {};
        ctx_.memory.release(bk.bytes);
        resident_bytes_ -= bk.bytes;
        bk.bytes = 0;
        cur_rows_ = &owned_rows_;
        pos_ = 0;
        first_of_bucket_ = true;
        return true;
      }
      if (!bk.spill)
        continue;
      size_t workspace = (budget_.m_blocks - 2) * budget_.block_bytes;
      if (bk.spill->payload_bytes() <= workspace) {
        // bucket fits: read it back and sort in place
        owned_rows_.clear();
        owned_rows_.reserve(bk.spill->rows());
        size_t bytes = 0;
        {
          SpillFile::Reader rd(*bk.spill);
          Row r;
          while (rd.next(r)) {
            size_t sz = row_spill_bytes(r);
            ctx_.memory.charge(sz);
            bytes += sz;
            owned_rows_.push_back(std::move(r));
          }
        }
        bk.spill.reset();
        std::sort(owned_rows_.begin(), owned_rows_.end(), std::ref(cmp_));
        ctx_.memory.release(bytes);
        cur_rows_ = &owned_rows_;
        pos_ = 0;
        first_of_bucket_ = true;
        return true;
      }
      cur_sorter_ = std::make_unique<ExternalSorter>(schema_, sort_key_,
                                                     budget_, tmp_, ctx_);
      {
        SpillFile::Reader rd(*bk.spill);
        Row r;
        while (rd.next(r))
          cur_sorter_->push(std::move(r));
      }
      bk.spill.reset();
      cur_sorter_->finish();
      first_of_bucket_ = true;
      return true;
    }
    return false;
  }

  RowStreamPtr in_;
  Schema schema_;
  std::vector<size_t> hash_cols_;
  AttrSeq sort_key_;
  RowComparator cmp_;
  MemoryBudget budget_;
  TempDir &tmp_;
  RunContext &ctx_;
  std::shared_ptr<bool> grouped_flag_;

  size_t n_buckets_ = 0;
  size_t staging_bytes_ = 0;
  std::vector<Bucket> buckets_;
  size_t resident_bytes_ = 0;
  size_t spilled_count_ = 0;
  bool built_ = false;

  size_t phase_cursor_ = 0;
  std::vector<Row> owned_rows_;
  std::vector<Row> *cur_rows_ = nullptr;
  size_t pos_ = 0;
  std::unique_ptr<ExternalSorter> cur_sorter_;
  bool first_of_bucket_ = true;
};

} // namespace

HashedSortResult hashed_sort(RowStreamPtr in, const AttrSet &hash_key,
                             const AttrSeq &sort_key, size_t n_buckets,
                             const MemoryBudget &budget, TempDir &tmp,
                             RunContext &ctx) {
  auto flag = std::make_shared<bool>(false);
  auto stream = std::make_unique<HashedSortStream>(
      std::move(in), hash_key, sort_key, n_buckets, budget, tmp, ctx, flag);
  return {std::move(stream), flag};
}

// ----------------------------------------------------------- segmented sort

namespace {

class SegmentedSortStream : public RowStream {
public:
  SegmentedSortStream(RowStreamPtr in, SegProp input_prop, SsTarget target,
                      MemoryBudget budget, TempDir &tmp, RunContext &ctx)
      : in_(std::move(in)), schema_(in_->schema()),
        input_prop_(std::move(input_prop)), target_(std::move(target)),
        detector_(schema_, input_prop_.x, target_.alpha),
        alpha_cmp_(schema_, target_.alpha),
        beta_cmp_(schema_, target_.beta.empty() ? target_.key : target_.beta),
        budget_(budget), tmp_(tmp), ctx_(ctx),
        workspace_bytes_((budget.m_blocks - 2) * budget.block_bytes) {}

  std::optional<StreamItem> next() override {
    while (true) {
      if (pos_ < unit_rows_.size()) {
        StreamItem item{std::move(unit_rows_[pos_++]), emit_segment_start_};
        emit_segment_start_ = false;
        if (pos_ == unit_rows_.size()) {
          ctx_.memory.release(unit_bytes_);
          unit_bytes_ = 0;
          unit_rows_.clear();
          pos_ = 0;
        }
        return item;
      }
      if (unit_sorter_) {
        if (auto r = unit_sorter_->pull()) {
          StreamItem item{std::move(*r), emit_segment_start_};
          emit_segment_start_ = false;
          return item;
        }
        unit_sorter_.reset();
      }
      if (!load_unit())
        return std::nullopt;
    }
  }
  const Schema &schema() const override { return schema_; }

private:
  bool load_unit() {
    if (done_ && !pending_)
      return false;
    bool unit_starts_segment = false;
    if (pending_) {
      unit_starts_segment = pending_->segment_start;
      stage(std::move(pending_->row));
      pending_.reset();
    }
    while (!done_) {
      auto item = in_->next();
      if (!item) {
        done_ = true;
        in_.reset();
        break;
      }
      check_contract(*item);
      bool new_unit = detector_.observe(*item);
      bool unit_empty = unit_rows_.empty() && !unit_sorter_;
      if (new_unit && !unit_empty) {
        pending_ = std::move(item);
        break;
      }
      if (unit_empty)
        unit_starts_segment = item->segment_start;
      stage(std::move(item->row));
    }
    if (unit_rows_.empty() && !unit_sorter_)
      return false;
    if (unit_sorter_)
      unit_sorter_->finish();
    else
      std::sort(unit_rows_.begin(), unit_rows_.end(), std::ref(beta_cmp_));
    pos_ = 0;
    emit_segment_start_ = first_unit_ || unit_starts_segment;
    first_unit_ = false;
    return true;
  }

  void stage(Row r) {
    if (unit_sorter_) {
      unit_sorter_->push(std::move(r));
      return;
    }
    size_t sz = row_spill_bytes(r);
    if (unit_bytes_ + sz > workspace_bytes_) {
      // unit outgrew memory: hand the whole unit to an external sort,
      // releasing each buffered row as the sorter takes it over
      unit_sorter_ = std::make_unique<ExternalSorter>(
          schema_, target_.beta.empty() ? target_.key : target_.beta, budget_,
          tmp_, ctx_);
      for (auto &buf : unit_rows_) {
        size_t bsz = row_spill_bytes(buf);
        ctx_.memory.release(bsz);
        unit_bytes_ -= std::min(unit_bytes_, bsz);
        unit_sorter_->push(std::move(buf));
      }
      unit_bytes_ = 0;
      unit_rows_.clear();
      unit_sorter_->push(std::move(r));
      return;
    }
    ctx_.memory.charge(sz);
    unit_bytes_ += sz;
    unit_rows_.push_back(std::move(r));
  }

  void check_contract(const StreamItem &item) {
    if (have_prev_ && !item.segment_start && !alpha_cmp_.empty() &&
        alpha_cmp_.compare_key(prev_, item.row) > 0)
      throw ContractViolation("segmented sort input not ordered as declared: " +
                              input_prop_.to_string());
    prev_ = item.row;
    have_prev_ = true;
  }

  RowStreamPtr in_;
  Schema schema_;
  SegProp input_prop_;
  SsTarget target_;
  UnitBoundaryDetector detector_;
  RowComparator alpha_cmp_;
  RowComparator beta_cmp_;
  MemoryBudget budget_;
  TempDir &tmp_;
  RunContext &ctx_;
  size_t workspace_bytes_;

  std::optional<StreamItem> pending_;
  bool done_ = false;
  bool first_unit_ = true;
  bool emit_segment_start_ = false;

  std::vector<Row> unit_rows_;
  size_t unit_bytes_ = 0;
  size_t pos_ = 0;
  std::unique_ptr<ExternalSorter> unit_sorter_;

  bool have_prev_ = false;
  Row prev_;
};

} // namespace

RowStreamPtr segmented_sort(RowStreamPtr in, const SegProp &input_prop,
                            const SsTarget &target, const MemoryBudget &budget,
                            TempDir &tmp, RunContext &ctx) {
  return std::make_unique<SegmentedSortStream>(std::move(in), input_prop,
                                               target, budget, tmp, ctx);
}

} // namespace wfopt
