#include "wfopt/order_algebra.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace wfopt {

std::string SegProp::to_string() const {
  std::ostringstream os;
  os << "R" << (grouped ? "^g" : "") << "_" << x.to_string() << ","
     << y.to_string();
  return os.str();
}

const char *to_string(WfKind k) {
  switch (k) {
  case WfKind::Rank:
    return "rank";
  case WfKind::DenseRank:
    return "dense_rank";
  case WfKind::RowNumber:
    return "row_number";
  case WfKind::Sum:
    return "sum";
  }
  return "?";
}

std::optional<WfKind> wf_kind_from_string(const std::string &s) {
  if (s == "rank")
    return WfKind::Rank;
  if (s == "dense_rank")
    return WfKind::DenseRank;
  if (s == "row_number")
    return WfKind::RowNumber;
  if (s == "sum")
    return WfKind::Sum;
  return std::nullopt;
}

WindowFunc::WindowFunc(AttrSet wpk_, AttrSeq wok_, WfKind kind_,
                       std::string name, AttrId sum_arg_)
    : wpk(std::move(wpk_)), wpk_decl(wpk.as_seq()), wok(std::move(wok_)),
      kind(kind_), sum_arg(std::move(sum_arg_)), output_name(std::move(name)) {
  if (wpk.empty() && wok.empty())
    throw InvalidArgument("window function needs a partition or ordering key");
  for (const auto &k : wok)
    if (wpk.contains(k.attr))
      throw InvalidArgument("ordering key attr also in partition key: " +
                            k.attr.name);
}

WindowFunc WindowFunc::with_decl(AttrSeq wpk_decl, AttrSeq wok, WfKind kind,
                                 std::string name, AttrId sum_arg) {
  WindowFunc wf(wpk_decl.attr_set(), std::move(wok), kind, std::move(name),
                std::move(sum_arg));
  wf.wpk_decl = std::move(wpk_decl);
  return wf;
}

std::string WindowFunc::to_string() const {
  std::ostringstream os;
  os << output_name << "=" << wfopt::to_string(kind) << "(" << wpk.to_string()
     << "," << wok.to_string() << ")";
  return os.str();
}

namespace {

// Core of Definition-2 matching: y starts with some permutation of `part`
// (ascending keys) immediately followed by `order`.
bool seq_matches(const AttrSeq &y, const AttrSet &part, const AttrSeq &order) {
  const size_t m = part.size();
  if (y.size() < m + order.size())
    return false;
  for (size_t i = 0; i < m; ++i)
    if (y[i].desc || !part.contains(y[i].attr))
      return false;
  // y is duplicate-free, so m hits from part means the full set.
  for (size_t j = 0; j < order.size(); ++j)
    if (y[m + j] != order[j])
      return false;
  return true;
}

} // namespace

bool matches(const SegProp &r, const WindowFunc &wf) {
  if (!r.x.subset_of(wf.wpk))
    return false;
  if (!r.grouped)
    return seq_matches(r.y, wf.wpk, wf.wok);
  // A grouped stream is constant on its segment key within each segment:
  // those attrs are order-irrelevant there, so drop them from the
  // per-segment order and from the partition key before the literal check.
  std::vector<AttrKey> reduced;
  for (const auto &k : r.y)
    if (!r.x.contains(k.attr))
      reduced.push_back(k);
  return seq_matches(AttrSeq(std::move(reduced)), wf.wpk.set_minus(r.x),
                     wf.wok);
}

bool hs_reorderable(const WindowFunc &wf) { return !wf.wpk.empty(); }

std::optional<SsTarget> ss_reorderable(const SegProp &r,
                                       const WindowFunc &wf) {
  const bool cond1 = !r.x.empty() && r.x.subset_of(wf.wpk);
  const bool cond2 = r.x.empty();
  if (!cond1 && !cond2)
    return std::nullopt;

  // Walk y as far as a permutation-of-wpk-then-wok key can follow it; the
  // walked prefix is the longest possible alpha and determines the
  // permutation prefix uniquely.
  std::vector<AttrKey> perm;
  AttrSet used;
  size_t i = 0;
  while (i < r.y.size()) {
    const AttrKey &k = r.y[i];
    if (perm.size() < wf.wpk.size()) {
      if (k.desc || !wf.wpk.contains(k.attr) || used.contains(k.attr))
        break;
      perm.push_back(k);
      used = used.set_union(AttrSet({k.attr}));
      ++i;
    } else {
      size_t j = i - wf.wpk.size();
      if (j >= wf.wok.size() || wf.wok[j] != k)
        break;
      ++i;
    }
  }
  const size_t alpha_len = i;
  if (cond2 && alpha_len == 0)
    return std::nullopt;

  for (const auto &a : wf.wpk.set_minus(used)) // rest in name order
    perm.emplace_back(a);

  SsTarget t;
  t.key = concat(AttrSeq(std::move(perm)), wf.wok);
  t.alpha = t.key.prefix(alpha_len);
  t.beta = t.key.suffix_from(alpha_len);
  t.output = SegProp(r.x, t.key, r.grouped, r.num_segments_hint);
  return t;
}

namespace {

// Position-wise covering constraints: a covering permutation gamma covers
// member i iff gamma's first |wpk_i| keys are ascending attrs of wpk_i and
// the next |wok_i| keys equal wok_i.
bool position_ok(const WindowFunc &m, size_t pos, const AttrKey &k) {
  if (pos < m.wpk.size())
    return !k.desc && m.wpk.contains(k.attr);
  size_t j = pos - m.wpk.size();
  if (j < m.wok.size())
    return k == m.wok[j];
  return true; // past this member's key
}

// Backtracking search for the lexicographically smallest covering
// permutation of w[c] that satisfies every member's positional constraints
// and starts with `prefix`. Returns nullopt if none exists.
std::optional<AttrSeq> place_covering(const std::vector<WindowFunc> &w,
                                      size_t c, const AttrSeq &prefix) {
  const WindowFunc &cov = w[c];
  const size_t m = cov.wpk.size();
  const size_t total = cov.key_size();
  if (prefix.size() > total)
    return std::nullopt;
  for (size_t i = 0; i < w.size(); ++i)
    if (i != c && w[i].key_size() > total)
      return std::nullopt;

  // Fixed suffix: check wok_c against every constraint now.
  for (size_t pos = m; pos < total; ++pos) {
    const AttrKey &k = cov.wok[pos - m];
    if (pos < prefix.size() && prefix[pos] != k)
      return std::nullopt;
    for (size_t i = 0; i < w.size(); ++i)
      if (i != c && !position_ok(w[i], pos, k))
        return std::nullopt;
  }

  std::vector<AttrKey> head(m);
  std::vector<bool> taken(cov.wpk.size(), false);
  const auto &pool = cov.wpk.attrs(); // sorted by name

  std::function<bool(size_t)> rec = [&](size_t pos) -> bool {
    if (pos == m)
      return true;
    for (size_t pi = 0; pi < pool.size(); ++pi) {
      if (taken[pi])
        continue;
      AttrKey k(pool[pi]);
      if (pos < prefix.size() && prefix[pos] != k)
        continue;
      bool ok = true;
      for (size_t i = 0; ok && i < w.size(); ++i)
        if (i != c && !position_ok(w[i], pos, k))
          ok = false;
      if (!ok)
        continue;
      taken[pi] = true;
      head[pos] = k;
      if (rec(pos + 1))
        return true;
      taken[pi] = false;
      if (pos < prefix.size())
        break; // position is pinned; no other candidate can match
    }
    return false;
  };
  if (!rec(0))
    return std::nullopt;
  return concat(AttrSeq(std::move(head)), cov.wok);
}

std::optional<CoverInfo> find_cover(const std::vector<WindowFunc> &w,
                                    const AttrSeq &prefix) {
  if (w.empty())
    throw InvalidArgument("cover-set test needs at least one member");
  size_t longest = 0;
  for (const auto &wf : w)
    longest = std::max(longest, wf.key_size());
  std::optional<CoverInfo> best;
  for (size_t c = 0; c < w.size(); ++c) {
    if (w[c].key_size() != longest)
      continue; // a covering key must be at least as long as every member
    auto gamma = place_covering(w, c, prefix);
    if (!gamma)
      continue;
    if (!best || *gamma < best->gamma)
      best = CoverInfo{c, *gamma};
  }
  return best;
}

} // namespace

std::optional<CoverInfo> is_cover_set(const std::vector<WindowFunc> &w) {
  return find_cover(w, AttrSeq{});
}

std::optional<CoverInfo> covering_with_prefix(const std::vector<WindowFunc> &w,
                                              const AttrSeq &prefix) {
  return find_cover(w, prefix);
}

namespace {

// The keys an extended key of wf can start with: any partition attr, or
// the head of wok when the partition key is empty.
std::vector<AttrKey> head_keys(const WindowFunc &wf) {
  std::vector<AttrKey> out;
  if (!wf.wpk.empty()) {
    for (const auto &a : wf.wpk)
      out.emplace_back(a);
  } else if (!wf.wok.empty()) {
    out.push_back(wf.wok[0]);
  }
  return out;
}

} // namespace

std::optional<AttrId> is_prefixable(const std::vector<WindowFunc> &w) {
  if (w.empty())
    throw InvalidArgument("prefixable test needs at least one member");
  std::vector<AttrKey> common = head_keys(w[0]);
  for (size_t i = 1; i < w.size() && !common.empty(); ++i) {
    auto hs = head_keys(w[i]);
    std::vector<AttrKey> kept;
    for (const auto &k : common)
      if (std::find(hs.begin(), hs.end(), k) != hs.end())
        kept.push_back(k);
    common = std::move(kept);
  }
  if (common.empty())
    return std::nullopt;
  auto it = std::min_element(common.begin(), common.end());
  return it->attr;
}

namespace {

// Candidate extension of a partial common key for one member: position t
// must land in the member's partition zone (any unused partition attr) or
// hit the ordering key exactly.
bool theta_feasible(const WindowFunc &wf, size_t t, const AttrKey &k) {
  if (t >= wf.key_size())
    return false;
  if (t < wf.wpk.size())
    return !k.desc && wf.wpk.contains(k.attr);
  return k == wf.wok[t - wf.wpk.size()];
}

} // namespace

AttrSeq theta(const std::vector<WindowFunc> &p) {
  if (!is_prefixable(p))
    throw InvalidArgument("theta over a non-prefixable set");

  std::vector<AttrKey> cur, best;
  size_t nodes = 0;
  const size_t node_cap = size_t(1) << 20;

  std::function<void()> rec = [&]() {
    if (++nodes > node_cap)
      throw CapacityError("common-prefix search exceeded node budget");
    if (cur.size() > best.size())
      best = cur;
    const size_t t = cur.size();
    // Enumerate candidates from the first member, filtered by the rest,
    // in name order so the first maximal answer is the smallest.
    std::vector<AttrKey> cands;
    if (t < p[0].wpk.size()) {
      for (const auto &a : p[0].wpk)
        cands.emplace_back(a);
    } else if (t < p[0].key_size()) {
      cands.push_back(p[0].wok[t - p[0].wpk.size()]);
    }
    for (const auto &k : cands) {
      if (std::any_of(cur.begin(), cur.end(),
                      [&](const AttrKey &u) { return u.attr == k.attr; }))
        continue;
      bool ok = true;
      for (size_t i = 1; ok && i < p.size(); ++i)
        ok = theta_feasible(p[i], t, k);
      if (!ok)
        continue;
      cur.push_back(k);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return AttrSeq(std::move(best));
}

std::optional<AttrSeq> covering_permutation_with_prefix(const WindowFunc &wf,
                                                        const AttrSeq &prefix) {
  std::vector<WindowFunc> w{wf};
  auto info = find_cover(w, prefix);
  if (!info)
    return std::nullopt;
  return info->gamma;
}

namespace oracle {

bool matches_bruteforce(const SegProp &r, const WindowFunc &wf, size_t bound) {
  if (!r.x.subset_of(wf.wpk))
    return false;
  // Enumerate the effective per-segment orders: y itself, or for grouped
  // streams every interleaving of the segment-key attrs into y minus those
  // attrs (they are constant per segment, their position is free).
  std::vector<AttrSeq> orders;
  if (!r.grouped) {
    orders.push_back(r.y);
  } else {
    std::vector<AttrKey> base_keys;
    for (const auto &k : r.y)
      if (!r.x.contains(k.attr))
        base_keys.push_back(k);
    AttrSeq base(std::move(base_keys));
    for (const auto &xp : permutations(r.x, bound)) {
      // all ways to merge xp (order fixed) into base (order fixed)
      std::function<void(size_t, size_t, AttrSeq)> merge =
          [&](size_t i, size_t j, AttrSeq acc) {
            if (i == xp.size() && j == base.size()) {
              orders.push_back(acc);
              return;
            }
            if (i < xp.size())
              merge(i + 1, j, concat(acc, AttrSeq({xp[i]})));
            if (j < base.size())
              merge(i, j + 1, concat(acc, AttrSeq({base[j]})));
          };
      merge(0, 0, AttrSeq{});
    }
  }
  bool found = false;
  for (const auto &y : orders) {
    for_each_permutation(
        wf.wpk,
        [&](const AttrSeq &p) {
          if (is_prefix(concat(p, wf.wok), y)) {
            found = true;
            return false;
          }
          return true;
        },
        bound);
    if (found)
      return true;
  }
  return false;
}

std::optional<AttrSeq> cover_bruteforce(const std::vector<WindowFunc> &w,
                                        size_t bound) {
  std::optional<AttrSeq> best;
  for (const auto &cand : w) {
    for_each_permutation(
        cand.wpk,
        [&](const AttrSeq &pc) {
          AttrSeq gamma = concat(pc, cand.wok);
          bool covers_all = true;
          for (const auto &m : w) {
            if (&m == &cand)
              continue;
            bool covered = false;
            for_each_permutation(
                m.wpk,
                [&](const AttrSeq &pm) {
                  if (is_prefix(concat(pm, m.wok), gamma)) {
                    covered = true;
                    return false;
                  }
                  return true;
                },
                bound);
            if (!covered) {
              covers_all = false;
              break;
            }
          }
          if (covers_all && (!best || gamma < *best))
            best = gamma;
          return true;
        },
        bound);
  }
  return best;
}

bool prefixable_bruteforce(const std::vector<WindowFunc> &w, size_t bound) {
  // Try every combination of per-member permutations and look for a
  // non-empty common prefix of the extended keys.
  std::vector<std::vector<AttrSeq>> keys;
  for (const auto &wf : w) {
    std::vector<AttrSeq> ks;
    for (const auto &p : permutations(wf.wpk, bound))
      ks.push_back(concat(p, wf.wok));
    if (ks.empty())
      ks.push_back(wf.wok);
    keys.push_back(std::move(ks));
  }
  std::function<bool(size_t, const AttrSeq &)> rec =
      [&](size_t i, const AttrSeq &common) -> bool {
    if (common.empty())
      return false;
    if (i == keys.size())
      return true;
    for (const auto &k : keys[i])
      if (rec(i + 1, i == 0 ? k : longest_common_prefix(common, k)))
        return true;
    return false;
  };
  if (keys.empty())
    return false;
  for (const auto &k0 : keys[0])
    if (rec(1, k0))
      return true;
  return false;
}

} // namespace oracle

} // namespace wfopt
