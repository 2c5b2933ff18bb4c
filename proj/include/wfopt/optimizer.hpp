#pragma once

#include "wfopt/plan.hpp"

namespace wfopt {

struct PlannerInput {
  SegProp input_prop;
  RelStats stats;
  size_t permutation_bound = kDefaultPermutationBound;
  size_t bfo_wf_bound = 8;
};

/// One cover-set class: member indexes (covering function first), the
/// covering member, and its covering permutation.
struct CoverClass {
  std::vector<size_t> members;
  size_t covering = 0;
  AttrSeq gamma;
};

struct CoverSetPartition {
  std::vector<CoverClass> classes;
};

/// Partitions window functions into cover sets. Pairwise-incompatible
/// functions form a conflict graph colored with the DSATUR heuristic;
/// because pairwise compatibility does not imply a joint covering
/// permutation, every color class is re-verified and greedily split when
/// the joint check fails. Classes come back ordered by descending size.
CoverSetPartition partition_cover_sets(const std::vector<WindowFunc> &wfs);

/// Greedy partition into prefixable groups: repeatedly pick the witness
/// attribute compatible with the most remaining functions (ties broken by
/// name) and emit that group. Groups come back ordered by descending size.
std::vector<std::vector<size_t>>
partition_prefixable(const std::vector<WindowFunc> &wfs);

/// Cover-set planner: matched functions run first with no reordering;
/// functions reorderable by segmented sort run next, one SS per cover set;
/// the rest is split into prefixable groups, each opened by one cost-chosen
/// full/hashed sort and continued with segmented sorts.
Plan cso_plan(const Workload &w, const PlannerInput &in);

/// Like the cover-set planner but every reordering is a full sort.
Plan orcl_plan(const Workload &w, const PlannerInput &in);

/// Declaration order; every unmatched function gets a full sort whose key
/// is the partition key in declared order followed by the ordering key.
/// "Matched" here is literal: the current order must extend that exact
/// key, no permutations are considered.
Plan psql_plan(const Workload &w, const PlannerInput &in);

/// Brute force: enumerates every evaluation order and, per position, the
/// applicable step kinds, with sort keys restricted to the deterministic
/// prefix-seeking covering permutation of each function. The cover-set
/// plan participates as one more candidate, so the result never costs more
/// than cso_plan's. Throws CapacityError above the configured bound.
Plan bfo_plan(const Workload &w, const PlannerInput &in);

Plan plan_with_scheme(const std::string &scheme, const Workload &w,
                      const PlannerInput &in);

/// Partition count for a hashed sort: few enough that sub-block staging
/// stays within the budget, many enough that each bucket can sort in the
/// working space, and never more than the key has distinct values.
size_t hs_bucket_count(const RelStats &stats, const AttrSet &whk);

/// Test oracles: exhaustive minimum partition sizes over all set
/// partitions (Bell-number search; |wfs| must stay small).
namespace oracle {
size_t min_cover_partition(const std::vector<WindowFunc> &wfs);
size_t min_prefixable_partition(const std::vector<WindowFunc> &wfs);
} // namespace oracle

} // namespace wfopt
