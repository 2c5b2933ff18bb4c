#include "wfopt/optimizer.hpp"

#include "wfopt/reorder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace wfopt {

namespace {

std::vector<WindowFunc> pick(const std::vector<WindowFunc> &all,
                             const std::vector<size_t> &idx) {
  std::vector<WindowFunc> out;
  out.reserve(idx.size());
  for (size_t i : idx)
    out.push_back(all[i]);
  return out;
}

} // namespace

CoverSetPartition partition_cover_sets(const std::vector<WindowFunc> &wfs) {
  const size_t n = wfs.size();
  CoverSetPartition result;
  if (n == 0)
    return result;

  // Conflict graph: an edge wherever two functions cannot share a cover set.
  std::vector<std::vector<bool>> conflict(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      bool compatible = is_cover_set({wfs[i], wfs[j]}).has_value();
      conflict[i][j] = conflict[j][i] = !compatible;
    }

  // DSATUR coloring: highest saturation first, degree then name as ties.
  std::vector<int> color(n, -1);
  std::vector<size_t> degree(n, 0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      degree[i] += conflict[i][j] ? 1 : 0;
  for (size_t done = 0; done < n; ++done) {
    size_t pick_i = n;
    size_t best_sat = 0, best_deg = 0;
    for (size_t i = 0; i < n; ++i) {
      if (color[i] >= 0)
        continue;
      std::vector<bool> neigh_colors(n, false);
      size_t sat = 0;
      for (size_t j = 0; j < n; ++j)
        if (conflict[i][j] && color[j] >= 0 && !neigh_colors[color[j]]) {
          neigh_colors[color[j]] = true;
          ++sat;
        }
      bool better =
          pick_i == n || sat > best_sat ||
          (sat == best_sat &&
           (degree[i] > best_deg ||
            (degree[i] == best_deg &&
             wfs[i].output_name < wfs[pick_i].output_name)));
      if (better) {
        pick_i = i;
        best_sat = sat;
        best_deg = degree[i];
      }
    }
    std::vector<bool> used(n + 1, false);
    for (size_t j = 0; j < n; ++j)
      if (conflict[pick_i][j] && color[j] >= 0)
        used[color[j]] = true;
    int c = 0;
    while (used[c])
      ++c;
    color[pick_i] = c;
  }

  std::map<int, std::vector<size_t>> by_color;
  for (size_t i = 0; i < n; ++i)
    by_color[color[i]].push_back(i);

  // Verify each class jointly; peel the largest-named member until the
  // remainder passes, then re-partition the peeled members.
  std::vector<std::vector<size_t>> accepted;
  std::function<void(std::vector<size_t>)> settle =
      [&](std::vector<size_t> cls) {
        std::vector<size_t> peeled;
        while (cls.size() > 1 && !is_cover_set(pick(wfs, cls))) {
          auto it = std::max_element(
              cls.begin(), cls.end(), [&](size_t a, size_t b) {
                return wfs[a].output_name < wfs[b].output_name;
              });
          peeled.push_back(*it);
          cls.erase(it);
        }
        accepted.push_back(std::move(cls));
        if (peeled.empty())
          return;
        auto sub = partition_cover_sets(pick(wfs, peeled));
        for (const auto &sc : sub.classes) {
          std::vector<size_t> mapped;
          for (size_t m : sc.members)
            mapped.push_back(peeled[m]);
          accepted.push_back(std::move(mapped));
        }
      };
  for (auto &[c, members] : by_color)
    settle(members);

  std::stable_sort(accepted.begin(), accepted.end(),
                   [&](const auto &a, const auto &b) {
                     if (a.size() != b.size())
                       return a.size() > b.size();
                     return wfs[a.front()].output_name <
                            wfs[b.front()].output_name;
                   });

  for (auto &members : accepted) {
    auto info = is_cover_set(pick(wfs, members));
    if (!info)
      throw Error("cover-set verification failed after split");
    CoverClass cls;
    cls.covering = members[info->covering_index];
    cls.gamma = info->gamma;
    cls.members.push_back(cls.covering);
    for (size_t m : members)
      if (m != cls.covering)
        cls.members.push_back(m);
    result.classes.push_back(std::move(cls));
  }
  return result;
}

namespace {

bool witness_compatible(const WindowFunc &wf, const AttrId &a) {
  if (!wf.wpk.empty())
    return wf.wpk.contains(a);
  return !wf.wok.empty() && wf.wok[0].attr == a && !wf.wok[0].desc;
}

} // namespace

std::vector<std::vector<size_t>>
partition_prefixable(const std::vector<WindowFunc> &wfs) {
  std::vector<std::vector<size_t>> groups;
  std::vector<bool> taken(wfs.size(), false);
  size_t remaining = wfs.size();
  while (remaining > 0) {
    // candidate witnesses: every attr usable as some remaining wf's head
    std::vector<AttrId> cands;
    for (size_t i = 0; i < wfs.size(); ++i) {
      if (taken[i])
        continue;
      for (const auto &a : wfs[i].wpk)
        cands.push_back(a);
      if (wfs[i].wpk.empty() && !wfs[i].wok.empty())
        cands.push_back(wfs[i].wok[0].attr);
    }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

    AttrId best;
    size_t best_count = 0;
    for (const auto &a : cands) {
      size_t cnt = 0;
      for (size_t i = 0; i < wfs.size(); ++i)
        if (!taken[i] && witness_compatible(wfs[i], a))
          ++cnt;
      if (cnt > best_count) {
        best_count = cnt;
        best = a;
      }
    }
    std::vector<size_t> group;
    if (best_count == 0) {
      // degenerate members with no possible head each get their own group
      for (size_t i = 0; i < wfs.size(); ++i)
        if (!taken[i]) {
          group.push_back(i);
          taken[i] = true;
          --remaining;
          break;
        }
    } else {
      for (size_t i = 0; i < wfs.size(); ++i)
        if (!taken[i] && witness_compatible(wfs[i], best)) {
          group.push_back(i);
          taken[i] = true;
          --remaining;
        }
    }
    groups.push_back(std::move(group));
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [&](const auto &a, const auto &b) {
                     if (a.size() != b.size())
                       return a.size() > b.size();
                     return wfs[a.front()].output_name <
                            wfs[b.front()].output_name;
                   });
  return groups;
}

// ----------------------------------------------------------------- helpers

size_t hs_bucket_count(const RelStats &stats, const AttrSet &whk) {
  double d = stats.distinct(whk);
  double cap = std::max(1.0, (stats.m_blocks - 1) *
                                 static_cast<double>(kHsPartitionsPerBlock));
  // spilled rows carry framing overhead; aim for buckets the sort phase
  // can hold in memory, with headroom for skew
  double fit = std::ceil(stats.b_blocks / std::max(1.0, stats.m_blocks - 2));
  double want = std::max(16.0, 3 * fit);
  return static_cast<size_t>(std::max(1.0, std::min({d, cap, want})));
}

namespace {

struct Threaded {
  SegProp prop;
  double k = 1; // segment count estimate for costing
};

double prop_segments(const SegProp &p, const RelStats &stats) {
  if (p.num_segments_hint)
    return static_cast<double>(*p.num_segments_hint);
  if (p.x.empty())
    return 1;
  return stats.distinct(p.x);
}

RelStats stats_at(const RelStats &base, const Threaded &t) {
  RelStats s = base;
  s.k_segments = t.k;
  return s;
}



/// Covering permutation for a class that shares the longest possible
/// prefix with the current order `y` (and at least `min_prefix` of it).
struct CoverTarget {
  CoverInfo info;
  size_t shared; // |gamma ^ y|
};

std::optional<CoverTarget> best_cover_target(const std::vector<WindowFunc> &cls,
                                             const AttrSeq &y,
                                             size_t min_prefix) {
  size_t longest = 0;
  for (const auto &wf : cls)
    longest = std::max(longest, wf.key_size());
  size_t max_l = std::min(y.size(), longest);
  for (size_t l = max_l + 1; l-- > 0;) {
    if (l < min_prefix)
      break;
    if (auto info = covering_with_prefix(cls, y.prefix(l)))
      return CoverTarget{*info, l};
  }
  return std::nullopt;
}

SsTarget make_ss_target(const AttrSeq &gamma, const SegProp &cur) {
  SsTarget t;
  t.key = gamma;
  t.alpha = longest_common_prefix(gamma, cur.y);
  t.beta = gamma.suffix_from(t.alpha.size());
  t.output = SegProp(cur.x, gamma, cur.grouped, cur.num_segments_hint);
  return t;
}

/// Reorders class members so `covering` leads, preserving workload order
/// for the rest, and maps back to workload indexes.
std::vector<size_t> class_wf_order(const std::vector<size_t> &members,
                                   size_t covering) {
  std::vector<size_t> out{covering};
  for (size_t m : members)
    if (m != covering)
      out.push_back(m);
  std::sort(out.begin() + 1, out.end());
  return out;
}

struct CsoOptions {
  bool allow_hs = true;
  bool allow_ss = true;
};

Plan cover_set_plan(const Workload &w, const PlannerInput &in,
                    const CsoOptions &opt, const std::string &scheme) {
  Plan plan;
  plan.scheme = scheme;
  plan.input_prop = in.input_prop;
  Threaded t{in.input_prop, prop_segments(in.input_prop, in.stats)};

  std::vector<size_t> c0, c1, c2;
  for (size_t i = 0; i < w.size(); ++i) {
    if (matches(t.prop, w.wfs[i]))
      c0.push_back(i);
    else if (ss_reorderable(t.prop, w.wfs[i]))
      c1.push_back(i);
    else
      c2.push_back(i);
  }

  if (!c0.empty()) {
    PlanStep step;
    step.kind = ReorderKind::None;
    step.wf_idx = c0;
    step.out_prop = t.prop;
    plan.steps.push_back(std::move(step));
  }

  // Emits one segmented-sort step for a cover-set class; returns false if
  // no covering permutation reaches the current order (callers then fall
  // back to a full sort of the class's covering key).
  auto emit_ss_class = [&](const std::vector<size_t> &members) -> bool {
    auto cls = pick(w.wfs, members);
    size_t min_prefix = t.prop.x.empty() ? 1 : 0;
    auto target = best_cover_target(cls, t.prop.y, min_prefix);
    if (!target)
      return false;
    size_t covering = members[target->info.covering_index];
    // every member must be matched by the reordered stream
    SegProp out(t.prop.x, target->info.gamma, t.prop.grouped,
                t.prop.num_segments_hint);
    for (size_t m : members)
      if (!matches(out, w.wfs[m]))
        return false;
    PlanStep step;
    step.kind = ReorderKind::Ss;
    step.sort_key = target->info.gamma;
    step.ss = make_ss_target(target->info.gamma, t.prop);
    step.est_cost =
        cost_ss(stats_at(in.stats, t), step.ss.alpha, t.prop.x).io_blocks;
    step.out_prop = step.ss.output;
    step.wf_idx = class_wf_order(members, covering);
    t.prop = step.out_prop;
    plan.steps.push_back(std::move(step));
    return true;
  };

  // Full/hashed sort for the class that opens a prefixable group (or any
  // class that a segmented sort cannot serve).
  auto emit_fs_hs_class = [&](const std::vector<size_t> &members,
                              const AttrSeq &theta_prefix,
                              const AttrSet &whk_limit) {
    auto cls = pick(w.wfs, members);
    auto info = covering_with_prefix(cls, theta_prefix);
    if (!info)
      info = is_cover_set(cls); // drop the prefix goal rather than fail
    if (!info)
      throw Error("cover-set class lost its covering permutation");
    size_t covering = members[info->covering_index];
    const AttrSeq &gamma = info->gamma;

    std::vector<ReorderChoice> options;
    options.push_back({ReorderKind::Fs, cost_fs(stats_at(in.stats, t))});
    AttrSet whk;
    if (opt.allow_hs) {
      // longest prefix of the shared key inside every partition key of the
      // class, further limited to attrs every later group member partitions
      // by (a hashed stream keeps its hash key as the segment key).
      for (const auto &k : theta_prefix) {
        bool ok = !k.desc && whk_limit.contains(k.attr);
        for (const auto &wf : cls)
          ok = ok && wf.wpk.contains(k.attr);
        if (!ok)
          break;
        whk = whk.set_union(AttrSet({k.attr}));
      }
      if (!whk.empty())
        options.push_back(
            {ReorderKind::Hs, cost_hs(stats_at(in.stats, t), whk)});
    }
    auto choice = compare_ops(options);

    PlanStep step;
    step.kind = choice.kind;
    step.sort_key = gamma;
    step.est_cost = choice.cost.io_blocks;
    if (choice.kind == ReorderKind::Hs) {
      step.hash_key = whk;
      step.hs_buckets = hs_bucket_count(in.stats, whk);
      step.out_prop = SegProp(whk, gamma);
      t.k = static_cast<double>(step.hs_buckets);
    } else {
      step.out_prop = SegProp::sorted_on(gamma);
      t.k = 1;
    }
    step.wf_idx = class_wf_order(members, covering);
    t.prop = step.out_prop;
    plan.steps.push_back(std::move(step));
  };

  if (!c1.empty()) {
    auto part = partition_cover_sets(pick(w.wfs, c1));
    for (const auto &cls : part.classes) {
      std::vector<size_t> members;
      for (size_t m : cls.members)
        members.push_back(c1[m]);
      std::sort(members.begin(), members.end());
      bool ok = opt.allow_ss && emit_ss_class(members);
      if (!ok)
        emit_fs_hs_class(members, AttrSeq{}, AttrSet{});
    }
  }

  if (!c2.empty()) {
    auto groups = partition_prefixable(pick(w.wfs, c2));
    for (const auto &g : groups) {
      std::vector<size_t> gidx;
      for (size_t m : g)
        gidx.push_back(c2[m]);
      std::sort(gidx.begin(), gidx.end());
      auto gwfs = pick(w.wfs, gidx);
      AttrSeq th = theta(gwfs);

      // attrs every member of the whole group partitions by; hashing on
      // anything wider would leave later cover sets unmatched
      AttrSet whk_limit;
      {
        std::vector<AttrId> shared;
        bool first = true;
        for (const auto &wf : gwfs) {
          if (first) {
            shared = wf.wpk.attrs();
            first = false;
          } else {
            std::vector<AttrId> kept;
            for (const auto &a : shared)
              if (wf.wpk.contains(a))
                kept.push_back(a);
            shared = std::move(kept);
          }
        }
        whk_limit = AttrSet(std::move(shared));
      }

      auto part = partition_cover_sets(gwfs);
      bool first_class = true;
      for (const auto &cls : part.classes) {
        std::vector<size_t> members;
        for (size_t m : cls.members)
          members.push_back(gidx[m]);
        std::sort(members.begin(), members.end());
        if (first_class) {
          emit_fs_hs_class(members, th, whk_limit);
          first_class = false;
        } else {
          bool ok = opt.allow_ss && emit_ss_class(members);
          if (!ok)
            emit_fs_hs_class(members, th, whk_limit);
        }
      }
    }
  }

  for (const auto &s : plan.steps)
    plan.est_total_cost += s.est_cost;
  return plan;
}

} // namespace

Plan cso_plan(const Workload &w, const PlannerInput &in) {
  return cover_set_plan(w, in, CsoOptions{true, true}, "cso");
}

Plan orcl_plan(const Workload &w, const PlannerInput &in) {
  return cover_set_plan(w, in, CsoOptions{false, false}, "orcl");
}

Plan psql_plan(const Workload &w, const PlannerInput &in) {
  Plan plan;
  plan.scheme = "psql";
  plan.input_prop = in.input_prop;
  Threaded t{in.input_prop, prop_segments(in.input_prop, in.stats)};

  for (size_t i = 0; i < w.size(); ++i) {
    const WindowFunc &wf = w.wfs[i];
    AttrSeq decl_key = concat(wf.wpk_decl, wf.wok);
    bool matched = t.prop.x.subset_of(wf.wpk) && is_prefix(decl_key, t.prop.y);
    PlanStep step;
    if (matched) {
      step.kind = ReorderKind::None;
      step.out_prop = t.prop;
    } else {
      step.kind = ReorderKind::Fs;
      step.sort_key = decl_key;
      step.est_cost = cost_fs(stats_at(in.stats, t)).io_blocks;
      step.out_prop = SegProp::sorted_on(step.sort_key);
      t.prop = step.out_prop;
      t.k = 1;
    }
    step.wf_idx = {i};
    plan.steps.push_back(std::move(step));
  }
  for (const auto &s : plan.steps)
    plan.est_total_cost += s.est_cost;
  return plan;
}

// --------------------------------------------------------------------- BFO

namespace {

struct BfoState {
  Plan best;
  bool have_best = false;
  const Workload *w = nullptr;
  const PlannerInput *in = nullptr;
  const RelStats &stats() const { return in->stats; }
};

AttrSeq prefix_seeking_key(const WindowFunc &wf, const AttrSeq &y) {
  for (size_t l = std::min(y.size(), wf.key_size()) + 1; l-- > 0;) {
    if (auto g = covering_permutation_with_prefix(wf, y.prefix(l)))
      return *g;
  }
  // unreachable: l == 0 always succeeds
  return concat(wf.wpk.as_seq(), wf.wok);
}

void bfo_search(BfoState &st, std::vector<bool> &used, size_t depth,
                Threaded t, Plan &acc) {
  const Workload &w = *st.w;
  if (depth == w.size()) {
    if (!st.have_best || acc.est_total_cost < st.best.est_total_cost) {
      st.best = acc;
      st.have_best = true;
    }
    return;
  }
  for (size_t i = 0; i < w.size(); ++i) {
    if (used[i])
      continue;
    const WindowFunc &wf = w.wfs[i];
    used[i] = true;

    auto attempt = [&](PlanStep step, Threaded nt) {
      step.wf_idx = {i};
      acc.steps.push_back(step);
      acc.est_total_cost += step.est_cost;
      bfo_search(st, used, depth + 1, nt, acc);
      acc.est_total_cost -= step.est_cost;
      acc.steps.pop_back();
    };

    if (matches(t.prop, wf)) {
      PlanStep step;
      step.kind = ReorderKind::None;
      step.out_prop = t.prop;
      attempt(std::move(step), t);
    } else {
      if (auto ss = ss_reorderable(t.prop, wf)) {
        PlanStep step;
        step.kind = ReorderKind::Ss;
        step.sort_key = ss->key;
        step.ss = *ss;
        step.out_prop = ss->output;
        step.est_cost =
            cost_ss(stats_at(st.stats(), t), ss->alpha, t.prop.x).io_blocks;
        attempt(std::move(step), Threaded{ss->output, t.k});
      }
      AttrSeq key = prefix_seeking_key(wf, t.prop.y);
      {
        PlanStep step;
        step.kind = ReorderKind::Fs;
        step.sort_key = key;
        step.out_prop = SegProp::sorted_on(key);
        step.est_cost = cost_fs(stats_at(st.stats(), t)).io_blocks;
        attempt(std::move(step), Threaded{step.out_prop, 1});
      }
      if (hs_reorderable(wf)) {
        PlanStep step;
        step.kind = ReorderKind::Hs;
        step.sort_key = key;
        step.hash_key = wf.wpk;
        step.hs_buckets = hs_bucket_count(st.stats(), wf.wpk);
        step.out_prop = SegProp(wf.wpk, key);
        step.est_cost = cost_hs(stats_at(st.stats(), t), wf.wpk).io_blocks;
        attempt(std::move(step),
                Threaded{step.out_prop,
                         static_cast<double>(step.hs_buckets)});
      }
    }
    used[i] = false;
  }
}

} // namespace

Plan bfo_plan(const Workload &w, const PlannerInput &in) {
  if (w.size() > in.bfo_wf_bound)
    throw CapacityError("brute-force planning bounded at " +
                        std::to_string(in.bfo_wf_bound) + " window functions");

  BfoState st;
  st.w = &w;
  st.in = &in;
  // The cover-set plan is one of the candidate chains; enumeration must
  // beat it strictly to replace it.
  st.best = cso_plan(w, in);
  st.best.scheme = "bfo";
  st.have_best = true;

  Plan acc;
  acc.scheme = "bfo";
  acc.input_prop = in.input_prop;
  std::vector<bool> used(w.size(), false);
  Threaded t{in.input_prop, prop_segments(in.input_prop, in.stats)};
  bfo_search(st, used, 0, t, acc);
  return st.best;
}

Plan plan_with_scheme(const std::string &scheme, const Workload &w,
                      const PlannerInput &in) {
  if (scheme == "cso")
    return cso_plan(w, in);
  if (scheme == "bfo")
    return bfo_plan(w, in);
  if (scheme == "orcl")
    return orcl_plan(w, in);
  if (scheme == "psql")
    return psql_plan(w, in);
  throw InvalidArgument("unknown scheme: " + scheme);
}

// ----------------------------------------------------------------- oracles

namespace oracle {

namespace {

size_t min_partition(size_t n, const std::function<bool(const std::vector<size_t> &)> &feasible) {
  if (n == 0)
    return 0;
  // enumerate set partitions via restricted growth strings
  std::vector<size_t> assign(n, 0);
  size_t best = n;
  std::function<void(size_t, size_t)> rec = [&](size_t i, size_t blocks) {
    if (blocks >= best)
      return;
    if (i == n) {
      std::vector<std::vector<size_t>> parts(blocks);
      for (size_t j = 0; j < n; ++j)
        parts[assign[j]].push_back(j);
      for (const auto &p : parts)
        if (!feasible(p))
          return;
      best = std::min(best, blocks);
      return;
    }
    for (size_t b = 0; b <= blocks && b < best; ++b) {
      assign[i] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
  return best;
}

} // namespace

size_t min_cover_partition(const std::vector<WindowFunc> &wfs) {
  return min_partition(wfs.size(), [&](const std::vector<size_t> &part) {
    return is_cover_set(pick(wfs, part)).has_value();
  });
}

size_t min_prefixable_partition(const std::vector<WindowFunc> &wfs) {
  return min_partition(wfs.size(), [&](const std::vector<size_t> &part) {
    return is_prefixable(pick(wfs, part)).has_value();
  });
}

} // namespace oracle

} // namespace wfopt
