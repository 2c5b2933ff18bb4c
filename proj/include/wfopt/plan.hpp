#pragma once

#include <string>
#include <vector>

#include "wfopt/cost_model.hpp"
#include "wfopt/order_algebra.hpp"

namespace wfopt {

/// The window functions of one query, in SELECT-clause order.
struct Workload {
  std::vector<WindowFunc> wfs;

  Workload() = default;
  explicit Workload(std::vector<WindowFunc> w) : wfs(std::move(w)) {
    for (size_t i = 0; i < wfs.size(); ++i)
      for (size_t j = i + 1; j < wfs.size(); ++j)
        if (wfs[i].output_name == wfs[j].output_name)
          throw InvalidArgument("duplicate window output name: " +
                                wfs[i].output_name);
  }
  size_t size() const { return wfs.size(); }
};

/// One link of an evaluation chain: an optional reorder operation followed
/// by the window functions it enables. A None step evaluates functions the
/// incoming order already matches.
struct PlanStep {
  ReorderKind kind = ReorderKind::None;
  AttrSeq sort_key;            // FS and HS sort key; SS target key
  AttrSet hash_key;            // HS only
  size_t hs_buckets = 0;       // HS only, resolved from stats
  SsTarget ss;                 // SS only
  std::vector<size_t> wf_idx;  // workload indexes evaluated after this step
  SegProp out_prop;            // stream property after the step
  double est_cost = 0;         // estimated reorder cost in block transfers
};

struct Plan {
  std::string scheme;
  SegProp input_prop;
  std::vector<PlanStep> steps;
  double est_total_cost = 0;

  size_t count(ReorderKind k) const {
    size_t n = 0;
    for (const auto &s : steps)
      n += s.kind == k ? 1 : 0;
    return n;
  }
  /// Window functions evaluated without any reordering of their own.
  size_t matched_count() const {
    size_t n = 0;
    for (const auto &s : steps) {
      n += s.wf_idx.size();
      if (s.kind != ReorderKind::None && !s.wf_idx.empty())
        n -= 1;
    }
    return n;
  }

  /// Chain text, e.g. `ws -HS-> wf1 -SS-> wf2` with `-> wf` for matched
  /// functions.
  std::string to_text(const Workload &w) const;
  /// Machine-readable form.
  std::string to_json(const Workload &w) const;
};

} // namespace wfopt
