#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wfopt/attrs.hpp"

namespace wfopt {

/// Physical-order property of a row stream: the stream is a sequence of
/// segments whose x-value sets are pairwise disjoint, each segment sorted
/// on y. x empty means a single totally-y-ordered segment. `grouped`
/// additionally means every segment holds exactly one x-value.
struct SegProp {
  AttrSet x;
  AttrSeq y;
  bool grouped = false;
  std::optional<uint64_t> num_segments_hint;

  SegProp() = default;
  SegProp(AttrSet x_, AttrSeq y_, bool grouped_ = false,
          std::optional<uint64_t> k = std::nullopt)
      : x(std::move(x_)), y(std::move(y_)), grouped(grouped_),
        num_segments_hint(k) {
    if (grouped && x.empty())
      throw InvalidArgument("grouped stream needs non-empty segment key");
  }

  static SegProp unordered() { return SegProp{}; }
  static SegProp sorted_on(AttrSeq y) { return SegProp{AttrSet{}, std::move(y)}; }

  bool operator==(const SegProp &o) const {
    return x == o.x && y == o.y && grouped == o.grouped;
  }
  std::string to_string() const;
};

enum class WfKind { Rank, DenseRank, RowNumber, Sum };

const char *to_string(WfKind k);
std::optional<WfKind> wf_kind_from_string(const std::string &s);

/// One window function: partition key (a set), ordering key (a sequence),
/// and the function applied per partition. `wpk_decl` remembers the order
/// the partition attributes were written in, which the naive
/// declaration-order planner uses for its sort keys.
struct WindowFunc {
  AttrSet wpk;
  AttrSeq wpk_decl; // declaration order of wpk, ascending keys
  AttrSeq wok;
  WfKind kind = WfKind::Rank;
  AttrId sum_arg;          // only for Sum
  std::string output_name; // unique within a workload

  WindowFunc() = default;
  WindowFunc(AttrSet wpk_, AttrSeq wok_, WfKind kind_, std::string name,
             AttrId sum_arg_ = AttrId{});
  /// Keeps an explicit declaration order for the partition key.
  static WindowFunc with_decl(AttrSeq wpk_decl, AttrSeq wok, WfKind kind,
                              std::string name, AttrId sum_arg = AttrId{});

  /// |wpk| + |wok|.
  size_t key_size() const { return wpk.size() + wok.size(); }
  std::string to_string() const;
};

/// True iff the stream order described by r suffices to evaluate wf by one
/// sequential scan: r.x within wf's partition key and some permutation of
/// the partition key followed by wok prefixes the per-segment order. A
/// grouped stream is additionally ordered on its segment key, which widens
/// the test accordingly.
bool matches(const SegProp &r, const WindowFunc &wf);

/// Hash partitioning applies whenever there is a partition key to hash on.
bool hs_reorderable(const WindowFunc &wf);

/// Chosen reordering target for a segmented sort.
struct SsTarget {
  AttrSeq key;   // permutation-of-wpk followed by wok; the output order
  AttrSeq alpha; // common prefix of key and the input's y (already satisfied)
  AttrSeq beta;  // remainder of key; each alpha-group is sorted on it
  SegProp output;
};

/// Whether (r, wf) admits a segmented sort, and with which target.
/// Applies when r.x is non-empty and inside wf's partition key, or when
/// r.x is empty but some key permutation shares a non-empty prefix with
/// r.y. Among qualifying permutations the one with the longest shared
/// prefix wins, ties broken lexicographically.
std::optional<SsTarget> ss_reorderable(const SegProp &r, const WindowFunc &wf);

struct CoverInfo {
  size_t covering_index; // into the queried set
  AttrSeq gamma;         // covering permutation: full key of the covering wf
};

/// A set of window functions is a cover set when one member's key, under
/// some permutation of its partition attrs, is prefixed by every other
/// member's key (again under per-member permutations). Returns the
/// covering member and the lexicographically smallest covering
/// permutation, or nothing.
std::optional<CoverInfo> is_cover_set(const std::vector<WindowFunc> &w);

/// Like is_cover_set but the covering permutation must also start with
/// `prefix`. Used to aim a cover set's reorder key at an existing order.
std::optional<CoverInfo>
covering_with_prefix(const std::vector<WindowFunc> &w, const AttrSeq &prefix);

/// A set is prefixable iff a single attribute can head every member's key:
/// it sits in each member's partition key, or heads the ordering key of a
/// member with an empty partition key. Returns the smallest such witness.
std::optional<AttrId> is_prefixable(const std::vector<WindowFunc> &w);

/// Longest sequence that prefixes some permutation-extended key of every
/// member. Precondition: the set is prefixable.
AttrSeq theta(const std::vector<WindowFunc> &p);

/// A full key of wf (permutation of wpk then wok) starting with `prefix`,
/// remaining partition attrs appended in name order; nothing if impossible.
std::optional<AttrSeq> covering_permutation_with_prefix(const WindowFunc &wf,
                                                        const AttrSeq &prefix);

/// Brute-force references for the constructive checks above; used as test
/// oracles and kept independent of the fast paths.
namespace oracle {
bool matches_bruteforce(const SegProp &r, const WindowFunc &wf,
                        size_t bound = kDefaultPermutationBound);
std::optional<AttrSeq>
cover_bruteforce(const std::vector<WindowFunc> &w,
                 size_t bound = kDefaultPermutationBound);
bool prefixable_bruteforce(const std::vector<WindowFunc> &w,
                           size_t bound = kDefaultPermutationBound);
} // namespace oracle

} // namespace wfopt
