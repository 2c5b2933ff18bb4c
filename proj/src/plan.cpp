#include "wfopt/plan.hpp"

#include <sstream>

#include <json.hpp>

namespace wfopt {

std::string Plan::to_text(const Workload &w) const {
  std::ostringstream os;
  os << "ws";
  for (const auto &s : steps) {
    bool first = true;
    for (size_t idx : s.wf_idx) {
      if (first && s.kind != ReorderKind::None)
        os << " -" << wfopt::to_string(s.kind) << "-> ";
      else
        os << " -> ";
      os << w.wfs[idx].output_name;
      first = false;
    }
  }
  return os.str();
}

std::string Plan::to_json(const Workload &w) const {
  nlohmann::json j;
  j["scheme"] = scheme;
  j["estimated_cost"] = est_total_cost;
  j["steps"] = nlohmann::json::array();
  for (const auto &s : steps) {
    nlohmann::json js;
    js["op"] = wfopt::to_string(s.kind);
    if (s.kind == ReorderKind::Fs || s.kind == ReorderKind::Hs ||
        s.kind == ReorderKind::Ss) {
      auto key = nlohmann::json::array();
      for (const auto &k : s.sort_key)
        key.push_back(k.attr.name + (k.desc ? " desc" : ""));
      js["sort_key"] = key;
      js["estimated_cost"] = s.est_cost;
    }
    if (s.kind == ReorderKind::Hs) {
      auto hk = nlohmann::json::array();
      for (const auto &a : s.hash_key)
        hk.push_back(a.name);
      js["hash_key"] = hk;
      js["buckets"] = s.hs_buckets;
    }
    if (s.kind == ReorderKind::Ss) {
      auto alpha = nlohmann::json::array();
      for (const auto &k : s.ss.alpha)
        alpha.push_back(k.attr.name + (k.desc ? " desc" : ""));
      js["alpha"] = alpha;
    }
    auto wfs = nlohmann::json::array();
    for (size_t idx : s.wf_idx)
      wfs.push_back(w.wfs[idx].output_name);
    js["window_functions"] = wfs;
    j["steps"].push_back(std::move(js));
  }
  return j.dump(2);
}

} // namespace wfopt
