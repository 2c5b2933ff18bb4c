#include "wfopt/attrs.hpp"

#include <algorithm>
#include <sstream>

namespace wfopt {

AttrSeq::AttrSeq(std::vector<AttrKey> keys) : keys_(std::move(keys)) {
  for (size_t i = 0; i < keys_.size(); ++i)
    for (size_t j = i + 1; j < keys_.size(); ++j)
      if (keys_[i].attr == keys_[j].attr)
        throw InvalidArgument("duplicate attribute in sequence: " +
                              keys_[i].attr.name);
}

AttrSeq AttrSeq::of(std::initializer_list<std::string> names) {
  std::vector<AttrKey> ks;
  ks.reserve(names.size());
  for (const auto &n : names)
    ks.emplace_back(n);
  return AttrSeq(std::move(ks));
}

bool AttrSeq::contains_attr(const AttrId &a) const {
  return std::any_of(keys_.begin(), keys_.end(),
                     [&](const AttrKey &k) { return k.attr == a; });
}

AttrSet AttrSeq::attr_set() const {
  std::vector<AttrId> as;
  as.reserve(keys_.size());
  for (const auto &k : keys_)
    as.push_back(k.attr);
  return AttrSet(std::move(as));
}

AttrSeq AttrSeq::prefix(size_t n) const {
  n = std::min(n, keys_.size());
  return AttrSeq(std::vector<AttrKey>(keys_.begin(), keys_.begin() + n));
}

AttrSeq AttrSeq::suffix_from(size_t n) const {
  n = std::min(n, keys_.size());
  return AttrSeq(std::vector<AttrKey>(keys_.begin() + n, keys_.end()));
}

std::string AttrSeq::to_string() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < keys_.size(); ++i) {
    if (i)
      os << ",";
    os << keys_[i].attr.name;
    if (keys_[i].desc)
      os << " desc";
  }
  os << ")";
  return os.str();
}

AttrSet::AttrSet(std::vector<AttrId> attrs) : attrs_(std::move(attrs)) {
  std::sort(attrs_.begin(), attrs_.end());
  attrs_.erase(std::unique(attrs_.begin(), attrs_.end()), attrs_.end());
}

AttrSet AttrSet::of(std::initializer_list<std::string> names) {
  std::vector<AttrId> as;
  as.reserve(names.size());
  for (const auto &n : names)
    as.emplace_back(n);
  return AttrSet(std::move(as));
}

bool AttrSet::contains(const AttrId &a) const {
  return std::binary_search(attrs_.begin(), attrs_.end(), a);
}

bool AttrSet::subset_of(const AttrSet &o) const {
  return std::includes(o.attrs_.begin(), o.attrs_.end(), attrs_.begin(),
                       attrs_.end());
}

AttrSet AttrSet::set_union(const AttrSet &o) const {
  std::vector<AttrId> out;
  std::set_union(attrs_.begin(), attrs_.end(), o.attrs_.begin(),
                 o.attrs_.end(), std::back_inserter(out));
  return AttrSet(std::move(out));
}

AttrSet AttrSet::set_intersect(const AttrSet &o) const {
  std::vector<AttrId> out;
  std::set_intersection(attrs_.begin(), attrs_.end(), o.attrs_.begin(),
                        o.attrs_.end(), std::back_inserter(out));
  return AttrSet(std::move(out));
}

AttrSet AttrSet::set_minus(const AttrSet &o) const {
  std::vector<AttrId> out;
  std::set_difference(attrs_.begin(), attrs_.end(), o.attrs_.begin(),
                      o.attrs_.end(), std::back_inserter(out));
  return AttrSet(std::move(out));
}

AttrSeq AttrSet::as_seq() const {
  std::vector<AttrKey> ks;
  ks.reserve(attrs_.size());
  for (const auto &a : attrs_)
    ks.emplace_back(a);
  return AttrSeq(std::move(ks));
}

std::string AttrSet::to_string() const {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < attrs_.size(); ++i) {
    if (i)
      os << ",";
    os << attrs_[i].name;
  }
  os << "}";
  return os.str();
}

AttrSeq concat(const AttrSeq &x, const AttrSeq &y) {
  std::vector<AttrKey> ks;
  ks.reserve(x.size() + y.size());
  ks.insert(ks.end(), x.begin(), x.end());
  ks.insert(ks.end(), y.begin(), y.end());
  return AttrSeq(std::move(ks)); // ctor rejects duplicates
}

AttrSeq longest_common_prefix(const AttrSeq &x, const AttrSeq &y) {
  size_t n = std::min(x.size(), y.size());
  size_t i = 0;
  while (i < n && x[i] == y[i])
    ++i;
  return x.prefix(i);
}

bool is_prefix(const AttrSeq &x, const AttrSeq &y) {
  if (x.size() > y.size())
    return false;
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i])
      return false;
  return true;
}

void for_each_permutation(const AttrSet &s,
                          const std::function<bool(const AttrSeq &)> &fn,
                          size_t bound) {
  if (s.size() > bound)
    throw CapacityError("permutation enumeration over " +
                        std::to_string(s.size()) + " attributes exceeds bound " +
                        std::to_string(bound));
  std::vector<AttrId> ids = s.attrs(); // already sorted: first perm is lex-min
  do {
    std::vector<AttrKey> ks;
    ks.reserve(ids.size());
    for (const auto &a : ids)
      ks.emplace_back(a);
    if (!fn(AttrSeq(std::move(ks))))
      return;
  } while (std::next_permutation(ids.begin(), ids.end()));
}

std::vector<AttrSeq> permutations(const AttrSet &s, size_t bound) {
  std::vector<AttrSeq> out;
  for_each_permutation(
      s,
      [&](const AttrSeq &p) {
        out.push_back(p);
        return true;
      },
      bound);
  return out;
}

} // namespace wfopt
