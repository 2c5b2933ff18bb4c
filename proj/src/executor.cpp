#include "wfopt/executor.hpp"

#include "wfopt/reorder.hpp"

namespace wfopt {

Schema output_schema(const Schema &base, const Workload &w) {
  Schema out = base;
  for (const auto &wf : w.wfs)
    out = out.with_column(AttrId(wf.output_name), ValueKind::NullableInteger);
  return out;
}

namespace {

/// Widens every row with NULL slots for the window columns.
class ExtendStream : public RowStream {
public:
  ExtendStream(RowStreamPtr in, Schema out_schema)
      : in_(std::move(in)), schema_(std::move(out_schema)),
        extra_(schema_.size() - in_->schema().size()) {}
  std::optional<StreamItem> next() override {
    auto item = in_->next();
    if (!item)
      return std::nullopt;
    item->row.vals.resize(item->row.vals.size() + extra_);
    return item;
  }
  const Schema &schema() const override { return schema_; }

private:
  RowStreamPtr in_;
  Schema schema_;
  size_t extra_;
};

struct StepError : Error {
  explicit StepError(const std::string &msg) : Error(msg) {}
};

/// Rethrows stream errors once with the plan-step index attached.
class StepContextStream : public RowStream {
public:
  StepContextStream(RowStreamPtr in, size_t step)
      : in_(std::move(in)), step_(step) {}
  std::optional<StreamItem> next() override {
    try {
      return in_->next();
    } catch (const StepError &) {
      throw;
    } catch (const Error &e) {
      throw StepError("step " + std::to_string(step_) + ": " + e.what());
    }
  }
  const Schema &schema() const override { return in_->schema(); }

private:
  RowStreamPtr in_;
  size_t step_;
};

/// Feeds every row through a SegPropValidator before passing it on.
class ValidatingStream : public RowStream {
public:
  ValidatingStream(RowStreamPtr in, SegProp claim)
      : in_(std::move(in)), validator_(in_->schema(), std::move(claim)) {}
  std::optional<StreamItem> next() override {
    auto item = in_->next();
    if (!item)
      return std::nullopt;
    validator_.observe(item->row);
    if (auto err = validator_.finish())
      throw ContractViolation("order property violated: " + *err);
    return item;
  }
  const Schema &schema() const override { return in_->schema(); }

private:
  RowStreamPtr in_;
  SegPropValidator validator_;
};

/// Keeps the per-step contexts alive for the lifetime of the pipeline.
class ContextAnchorStream : public RowStream {
public:
  ContextAnchorStream(RowStreamPtr in,
                      std::shared_ptr<std::deque<RunContext>> ctxs)
      : in_(std::move(in)), ctxs_(std::move(ctxs)) {}
  std::optional<StreamItem> next() override { return in_->next(); }
  const Schema &schema() const override { return in_->schema(); }

private:
  RowStreamPtr in_;
  std::shared_ptr<std::deque<RunContext>> ctxs_;
};

} // namespace

Execution execute_plan(RowStreamPtr in, const Plan &plan,
                       const Workload &workload, const MemoryBudget &budget,
                       TempDir &tmp, const ExecOptions &opts) {
  const Schema out_schema = output_schema(in->schema(), workload);
  const size_t base_cols = in->schema().size();
  RowStreamPtr cur = std::make_unique<ExtendStream>(std::move(in), out_schema);

  auto ctxs = std::make_shared<std::deque<RunContext>>();
  SegProp prop = plan.input_prop;
  for (size_t si = 0; si < plan.steps.size(); ++si) {
    const PlanStep &step = plan.steps[si];
    RunContext &ctx = ctxs->emplace_back();
    switch (step.kind) {
    case ReorderKind::None:
      break;
    case ReorderKind::Fs:
      cur = full_sort(std::move(cur), step.sort_key, budget, tmp, ctx);
      break;
    case ReorderKind::Hs: {
      auto res = hashed_sort(std::move(cur), step.hash_key, step.sort_key,
                             step.hs_buckets ? step.hs_buckets
                                             : hs_max_partitions(budget),
                             budget, tmp, ctx);
      cur = std::move(res.stream);
      break;
    }
    case ReorderKind::Ss:
      cur = segmented_sort(std::move(cur), prop, step.ss, budget, tmp, ctx);
      break;
    }
    if (step.kind != ReorderKind::None) {
      prop = step.out_prop;
      if (opts.validate_props)
        cur = std::make_unique<ValidatingStream>(std::move(cur), prop);
    }
    for (size_t wi : step.wf_idx) {
      const WindowFunc &wf = workload.wfs[wi];
      if (!matches(prop, wf))
        throw ContractViolation(
            "step " + std::to_string(si) + ": stream order " +
            prop.to_string() + " does not match " + wf.to_string());
      cur = eval_window(std::move(cur), wf, base_cols + wi);
    }
    cur = std::make_unique<StepContextStream>(std::move(cur), si);
  }
  Execution exec;
  exec.stream = std::make_unique<ContextAnchorStream>(std::move(cur), ctxs);
  exec.step_ctx = ctxs;
  return exec;
}

} // namespace wfopt
