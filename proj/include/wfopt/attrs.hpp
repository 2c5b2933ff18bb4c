#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wfopt/common.hpp"

namespace wfopt {

/// Column identifier. Identity is the name, never a position.
struct AttrId {
  std::string name;

  AttrId() = default;
  explicit AttrId(std::string n) : name(std::move(n)) {
    if (name.empty())
      throw InvalidArgument("attribute name must be non-empty");
  }

  bool operator==(const AttrId &o) const { return name == o.name; }
  bool operator!=(const AttrId &o) const { return name != o.name; }
  bool operator<(const AttrId &o) const { return name < o.name; }
};

/// One element of an ordering key: an attribute plus its direction.
/// Two keys are interchangeable only if both attribute and direction agree.
struct AttrKey {
  AttrId attr;
  bool desc = false;

  AttrKey() = default;
  explicit AttrKey(AttrId a, bool d = false) : attr(std::move(a)), desc(d) {}
  explicit AttrKey(const std::string &n, bool d = false) : attr(n), desc(d) {}

  bool operator==(const AttrKey &o) const {
    return attr == o.attr && desc == o.desc;
  }
  bool operator!=(const AttrKey &o) const { return !(*this == o); }
  // Lexicographic by name, ascending before descending.
  bool operator<(const AttrKey &o) const {
    if (attr != o.attr)
      return attr < o.attr;
    return desc < o.desc;
  }
};

class AttrSet;

/// Ordered attribute sequence (sort keys, ordering keys, permutations).
/// No attribute may appear twice.
class AttrSeq {
public:
  AttrSeq() = default;
  explicit AttrSeq(std::vector<AttrKey> keys);
  /// Ascending keys from bare names.
  static AttrSeq of(std::initializer_list<std::string> names);

  size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const AttrKey &operator[](size_t i) const { return keys_[i]; }
  const std::vector<AttrKey> &keys() const { return keys_; }
  auto begin() const { return keys_.begin(); }
  auto end() const { return keys_.end(); }

  bool contains_attr(const AttrId &a) const;
  AttrSet attr_set() const;
  AttrSeq prefix(size_t n) const;
  AttrSeq suffix_from(size_t n) const;

  bool operator==(const AttrSeq &o) const { return keys_ == o.keys_; }
  bool operator!=(const AttrSeq &o) const { return keys_ != o.keys_; }
  /// Lexicographic; used only for deterministic tie-breaking.
  bool operator<(const AttrSeq &o) const { return keys_ < o.keys_; }

  std::string to_string() const;

private:
  std::vector<AttrKey> keys_;
};

/// Unordered attribute collection (partition keys, hash keys, segment keys).
/// Stored sorted by name so iteration order is deterministic.
class AttrSet {
public:
  AttrSet() = default;
  explicit AttrSet(std::vector<AttrId> attrs);
  static AttrSet of(std::initializer_list<std::string> names);

  size_t size() const { return attrs_.size(); }
  bool empty() const { return attrs_.empty(); }
  const std::vector<AttrId> &attrs() const { return attrs_; }
  auto begin() const { return attrs_.begin(); }
  auto end() const { return attrs_.end(); }

  bool contains(const AttrId &a) const;
  bool subset_of(const AttrSet &o) const;
  AttrSet set_union(const AttrSet &o) const;
  AttrSet set_intersect(const AttrSet &o) const;
  AttrSet set_minus(const AttrSet &o) const;

  /// Ascending key sequence in name order.
  AttrSeq as_seq() const;

  bool operator==(const AttrSet &o) const { return attrs_ == o.attrs_; }
  bool operator!=(const AttrSet &o) const { return attrs_ != o.attrs_; }
  bool operator<(const AttrSet &o) const { return attrs_ < o.attrs_; }

  std::string to_string() const;

private:
  std::vector<AttrId> attrs_; // sorted, unique
};

/// Sequence concatenation. The operands must be attribute-disjoint.
AttrSeq concat(const AttrSeq &x, const AttrSeq &y);

/// Longest p with p <= x and p <= y.
AttrSeq longest_common_prefix(const AttrSeq &x, const AttrSeq &y);

/// True iff x equals the first |x| elements of y.
bool is_prefix(const AttrSeq &x, const AttrSeq &y);

inline constexpr size_t kDefaultPermutationBound = 8;

/// Calls fn once per ordering of s, in lexicographic name order.
/// Throws CapacityError when |s| exceeds the bound; fn may return false
/// to stop early.
void for_each_permutation(const AttrSet &s,
                          const std::function<bool(const AttrSeq &)> &fn,
                          size_t bound = kDefaultPermutationBound);

/// All orderings of s, lexicographic. Prefer for_each_permutation for
/// searches that can stop early.
std::vector<AttrSeq> permutations(const AttrSet &s,
                                  size_t bound = kDefaultPermutationBound);

} // namespace wfopt
