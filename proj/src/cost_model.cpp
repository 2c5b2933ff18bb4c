#include "wfopt/cost_model.hpp"

#include <algorithm>
#include <cmath>

namespace wfopt {

double RelStats::distinct(const AttrSet &key) const {
  if (key.empty())
    return 1;
  std::vector<std::string> names;
  for (const auto &a : key)
    names.push_back(a.name);
  if (auto it = distinct_set.find(names); it != distinct_set.end())
    return std::max(1.0, it->second);
  double prod = 1;
  for (const auto &n : names) {
    auto it = distinct_attr.find(n);
    double d = it != distinct_attr.end() ? std::max(1.0, it->second) : t_rows;
    prod *= d;
    if (prod >= t_rows)
      return std::max(1.0, t_rows);
  }
  return std::max(1.0, std::min(prod, t_rows));
}

namespace {

// Merge passes for sorting `blocks` with the given budget and fan-in.
double merge_passes(double blocks, double m, double f) {
  if (blocks <= 2 * m)
    return 0;
  double runs = blocks / (2 * m);
  return std::ceil(std::log(runs) / std::log(std::max(2.0, f)) - 1e-9);
}

double fs_blocks(double blocks, double m, double f) {
  return 2 * blocks * (merge_passes(blocks, m, f) + 1);
}

// Per-piece sort cost: free when the piece fits in memory, external
// merge-sort price otherwise.
double piece_sort_blocks(double piece, double m, double f) {
  if (piece <= m)
    return 0;
  return fs_blocks(piece, m, f);
}

} // namespace

CostEstimate cost_fs(const RelStats &s) {
  return {fs_blocks(s.b_blocks, s.m_blocks, s.merge_order)};
}

CostEstimate cost_hs(const RelStats &s, const AttrSet &whk) {
  if (whk.empty())
    throw InvalidArgument("hashed sort needs a non-empty hash key");
  double n = std::max(1.0, s.distinct(whk));
  double n_resident = std::floor(s.m_blocks * n / s.b_blocks);
  double spilled_fraction = std::max(0.0, 1.0 - n_resident / n);
  double partition = 2 * s.b_blocks * spilled_fraction;
  double bucket = s.b_blocks / n;
  double sorts = n * piece_sort_blocks(bucket, s.m_blocks, s.merge_order);
  return {partition + sorts};
}

CostEstimate cost_ss(const RelStats &s, const AttrSeq &alpha,
                     const AttrSet &x) {
  double k = std::max(1.0, s.k_segments);
  double u = 1;
  if (!alpha.empty()) {
    double d_alpha = std::max(1.0, s.distinct(alpha));
    bool alpha_meets_x = false;
    for (const auto &a : alpha)
      if (x.contains(a.attr))
        alpha_meets_x = true;
    // A segment sees all distinct alpha values when alpha is independent
    // of the segment key, and roughly its 1/k share otherwise.
    u = alpha_meets_x ? std::min(s.t_rows / k, d_alpha / k)
                      : std::min(s.t_rows / k, d_alpha);
    u = std::max(1.0, u);
  }
  double units = k * u;
  double unit = s.b_blocks / units;
  return {units * piece_sort_blocks(unit, s.m_blocks, s.merge_order)};
}

const char *to_string(ReorderKind k) {
  switch (k) {
  case ReorderKind::None:
    return "none";
  case ReorderKind::Fs:
    return "FS";
  case ReorderKind::Hs:
    return "HS";
  case ReorderKind::Ss:
    return "SS";
  }
  return "?";
}

ReorderChoice compare_ops(const std::vector<ReorderChoice> &applicable) {
  if (applicable.empty())
    throw InvalidArgument("no applicable reorder operator");
  auto rank = [](ReorderKind k) {
    switch (k) { // preference on equal cost
    case ReorderKind::None:
      return 0;
    case ReorderKind::Ss:
      return 1;
    case ReorderKind::Hs:
      return 2;
    case ReorderKind::Fs:
      return 3;
    }
    return 4;
  };
  const ReorderChoice *best = &applicable[0];
  for (const auto &c : applicable) {
    if (c.cost.io_blocks < best->cost.io_blocks ||
        (c.cost.io_blocks == best->cost.io_blocks &&
         rank(c.kind) < rank(best->kind)))
      best = &c;
  }
  return *best;
}

} // namespace wfopt
