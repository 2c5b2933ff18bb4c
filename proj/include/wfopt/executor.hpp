#pragma once

#include <deque>

#include "wfopt/memory.hpp"
#include "wfopt/plan.hpp"
#include "wfopt/spill.hpp"
#include "wfopt/stream.hpp"
#include "wfopt/window_eval.hpp"

namespace wfopt {

/// Output schema of a workload over a base schema: every window column is
/// appended in declaration order, so the result shape does not depend on
/// the chosen plan.
Schema output_schema(const Schema &base, const Workload &w);

struct ExecOptions {
  bool validate_props = true; // check each reorder's claimed order property
};

/// A wired plan pipeline. Each plan step owns its own instrumentation
/// context (the memory budget is per reorder operation); contexts stay
/// alive as long as the stream does.
struct Execution {
  RowStreamPtr stream;
  std::shared_ptr<std::deque<RunContext>> step_ctx; // index = plan step

  IoStats total_io() const {
    IoStats s;
    for (const auto &c : *step_ctx) {
      s.spill_blocks_written += c.io.spill_blocks_written;
      s.spill_blocks_read += c.io.spill_blocks_read;
      s.spill_bytes += c.io.spill_bytes;
      s.merge_passes += c.io.merge_passes;
    }
    return s;
  }
  size_t max_step_peak_bytes() const {
    size_t m = 0;
    for (const auto &c : *step_ctx)
      m = std::max(m, c.memory.peak_bytes());
    return m;
  }
};

/// Builds the streaming pipeline for a plan: reorder steps feed window
/// evaluations, window columns land in their declared slots. The input
/// stream must satisfy plan.input_prop. Errors during execution carry the
/// index of the step that raised them.
Execution execute_plan(RowStreamPtr in, const Plan &plan,
                       const Workload &workload, const MemoryBudget &budget,
                       TempDir &tmp, const ExecOptions &opts = {});

} // namespace wfopt
