#include "wfopt/window_eval.hpp"

#include <algorithm>
#include <deque>

namespace wfopt {

namespace {

class WindowEvalStream : public RowStream {
public:
  WindowEvalStream(RowStreamPtr in, WindowFunc wf, size_t out_col)
      : in_(std::move(in)), schema_(in_->schema()), wf_(std::move(wf)),
        out_col_(out_col), part_cols_(column_indexes(schema_, wf_.wpk)),
        wok_cmp_(schema_, wf_.wok) {
    if (out_col_ >= schema_.size())
      throw InvalidArgument("output column out of range");
    if (wf_.kind == WfKind::Sum)
      sum_col_ = schema_.index_of(wf_.sum_arg);
  }

  std::optional<StreamItem> next() override {
    while (ready_.empty()) {
      auto item = done_ ? std::nullopt : in_->next();
      if (!item) {
        done_ = true;
        flush_pending(true);
        if (ready_.empty())
          return std::nullopt;
        break;
      }
      consume(std::move(*item));
    }
    StreamItem out = std::move(ready_.front());
    ready_.pop_front();
    return out;
  }
  const Schema &schema() const override { return schema_; }

private:
  // Per-partition accumulator; resets at every partition-key change.
  struct Cursor {
    uint64_t rows = 0;
    uint64_t rank = 0;
    uint64_t dense = 0;
    bool has_prev = false;
    Row prev;
  };

  void consume(StreamItem item) {
    bool new_part =
        !started_ || project(item.row, part_cols_) != cur_part_key_;
    if (new_part) {
      flush_pending(true);
      cur_part_key_ = project(item.row, part_cols_);
      cur_ = Cursor{};
      started_ = true;
    }
    switch (wf_.kind) {
    case WfKind::Rank:
    case WfKind::DenseRank: {
      cur_.rows++;
      if (!cur_.has_prev || wok_cmp_.compare_key(cur_.prev, item.row) != 0) {
        cur_.rank = cur_.rows;
        cur_.dense++;
      }
      cur_.prev = item.row;
      cur_.has_prev = true;
      item.row.vals[out_col_] = Value::of(static_cast<int64_t>(
          wf_.kind == WfKind::Rank ? cur_.rank : cur_.dense));
      ready_.push_back(std::move(item));
      break;
    }
    case WfKind::RowNumber: {
      // buffer one ordering-key tie run; number it by original rowid
      if (!pending_.empty() &&
          wok_cmp_.compare_key(pending_.front().row, item.row) != 0)
        flush_pending(false);
      pending_.push_back(std::move(item));
      break;
    }
    case WfKind::Sum: {
      pending_.push_back(std::move(item));
      break;
    }
    }
  }

  void flush_pending(bool partition_end) {
    if (pending_.empty())
      return;
    if (wf_.kind == WfKind::RowNumber) {
      std::vector<size_t> order(pending_.size());
      for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return pending_[a].row.rowid < pending_[b].row.rowid;
      });
      std::vector<uint64_t> number(pending_.size());
      for (size_t i = 0; i < order.size(); ++i)
        number[order[i]] = cur_.rows + i + 1;
      cur_.rows += pending_.size();
      for (size_t i = 0; i < pending_.size(); ++i) {
        pending_[i].row.vals[out_col_] =
            Value::of(static_cast<int64_t>(number[i]));
        ready_.push_back(std::move(pending_[i]));
      }
      pending_.clear();
      return;
    }
    if (wf_.kind == WfKind::Sum) {
      if (!partition_end)
        return;
      int64_t total = 0;
      bool any = false;
      for (const auto &it : pending_) {
        const Value &v = it.row.vals[sum_col_];
        if (!v.is_null() && v.tag == Value::Tag::Int) {
          total += v.num;
          any = true;
        }
      }
      Value out = any ? Value::of(total) : Value::null();
      for (auto &it : pending_) {
        it.row.vals[out_col_] = out;
        ready_.push_back(std::move(it));
      }
      pending_.clear();
    }
  }

  RowStreamPtr in_;
  Schema schema_;
  WindowFunc wf_;
  size_t out_col_;
  size_t sum_col_ = 0;
  std::vector<size_t> part_cols_;
  RowComparator wok_cmp_;

  bool started_ = false;
  bool done_ = false;
  std::vector<Value> cur_part_key_;
  Cursor cur_;
  std::deque<StreamItem> pending_;
  std::deque<StreamItem> ready_;
};

} // namespace

RowStreamPtr eval_window(RowStreamPtr in, const WindowFunc &wf,
                         size_t out_col) {
  return std::make_unique<WindowEvalStream>(std::move(in), wf, out_col);
}

} // namespace wfopt
