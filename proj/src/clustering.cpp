#include "swarm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "swarm/optcost.hpp"

namespace swarm {

double euclidean(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

double hausdorff(std::span<const Vec2> x, std::span<const Vec2> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("hausdorff: point sets must be non-empty");
  auto directed = [](std::span<const Vec2> from, std::span<const Vec2> to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& q : to) nearest = std::min(nearest, (p - q).norm());
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(directed(x, y), directed(y, x));
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Pair: return "pair";
    case EventKind::Merge: return "merge";
    case EventKind::Split: return "split";
    case EventKind::Insert: return "insert";
    case EventKind::Delete: return "delete";
  }
  return "unknown";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::Pair, EventKind::Merge, EventKind::Split, EventKind::Insert, EventKind::Delete})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown event kind: " + std::string(s));
}

namespace {

using Group = std::vector<AgentId>;

std::vector<Vec2> positions(const Group& g, const StateMap& states) {
  std::vector<Vec2> out;
  out.reserve(g.size());
  for (AgentId a : g) out.push_back(states.at(a).p);
  return out;
}

Group merged_members(const Group& a, const Group& b) {
  Group m;
  m.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m));
  return m;
}

struct LinkageCheck {
  bool accepted = false;
  MergeGate rejected_by = MergeGate::None;
  AgentId fi = -1, fj = -1;
  double cost = 0.0;
  double hd = 0.0;
};

LinkageCheck check_linkage(const Group& gi, const Group& gj, const StateMap& states, const GoalMap& goals,
                           const Config& cfg) {
  LinkageCheck out;
  double far = -1.0;
  for (AgentId i : gi) {
    const auto& si = states.at(i);
    for (AgentId j : gj) {
      const auto& sj = states.at(j);
      const double d = cfg.linkage_positions_only ? (si.p - sj.p).norm() : (si.vector() - sj.vector()).norm();
      if (d > far) {
        far = d;
        out.fi = i;
        out.fj = j;
      }
    }
  }
  out.cost = cost_distance(states.at(out.fi), states.at(out.fj), goals.at(out.fi), cfg);
  if (!(out.cost < cfg.c_tol)) {
    out.rejected_by = MergeGate::Cost;
    return out;
  }
  const auto pi = positions(gi, states);
  const auto pj = positions(gj, states);
  out.hd = hausdorff(pi, pj);
  if (!(out.hd <= cfg.d_tol)) {
    out.rejected_by = MergeGate::Hausdorff;
    return out;
  }
  out.accepted = true;
  return out;
}

// Groups sorted by smallest member, as ClusterSet::partition orders them.
void sort_groups(std::vector<Group>& groups) {
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end());
}

ClusterSet build_set(std::vector<Group> groups, const StateMap& states, const GoalMap& goals, const Config& cfg,
                     ClusterId first_id) {
  sort_groups(groups);
  ClusterSet cs;
  cs.agent_states = states;
  cs.next_id = first_id;
  for (auto& g : groups) cs.clusters.push_back(make_cluster(cs.next_id++, std::move(g), states, goals, cfg));
  for (const auto& [id, s] : states) cs.missed[id] = 0;
  return cs;
}

std::vector<Group> groups_of(const ClusterSet& cs) {
  std::vector<Group> out;
  for (const auto& c : cs.clusters) out.push_back(c.members);
  return out;
}

void merge_groups_to_fixed_point(std::vector<Group>& groups, const StateMap& states, const GoalMap& goals,
                                 const Config& cfg, std::vector<ClusteringEvent>& events) {
  bool changed = true;
  while (changed && groups.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i < groups.size() && !changed; ++i) {
      std::size_t best = groups.size();
      LinkageCheck best_check;
      for (std::size_t j = 0; j < groups.size(); ++j) {
        if (j == i) continue;
        auto chk = check_linkage(groups[i], groups[j], states, goals, cfg);
        if (chk.accepted && (best == groups.size() || chk.cost < best_check.cost)) {
          best = j;
          best_check = chk;
        }
      }
      if (best == groups.size()) continue;
      events.push_back({EventKind::Merge, groups[i], groups[best], best_check.cost, best_check.hd});
      groups[i] = merged_members(groups[i], groups[best]);
      groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(best));
      changed = true;
    }
  }
}

}  // namespace

MergeOutcome merge_clusters(const Cluster& ci, const Cluster& cj, const StateMap& states, const GoalMap& goals,
                            const Config& cfg) {
  if (ci.members.empty() || cj.members.empty()) throw std::invalid_argument("merge_clusters: empty cluster");
  for (AgentId a : ci.members)
    if (cj.contains(a)) throw std::invalid_argument("merge_clusters: clusters share members");
  const auto chk = check_linkage(ci.members, cj.members, states, goals, cfg);
  MergeOutcome out;
  out.rejected_by = chk.rejected_by;
  out.farthest_i = chk.fi;
  out.farthest_j = chk.fj;
  out.cost = chk.cost;
  out.hausdorff = chk.hd;
  if (chk.accepted) out.merged = make_cluster(ci.id, merged_members(ci.members, cj.members), states, goals, cfg);
  return out;
}

namespace {

struct PairingOutput {
  std::vector<Group> groups;
  std::vector<ClusteringEvent> events;
};

PairingOutput pair_groups(const StateMap& states, const GoalMap& goals, const Config& cfg) {
  PairingOutput out;
  std::vector<AgentId> ids;
  for (const auto& [id, s] : states) ids.push_back(id);
  std::set<AgentId> assigned;

  for (AgentId i : ids) {
    if (assigned.count(i)) continue;
    const auto& si = states.at(i);
    const auto& gi = goals.at(i);
    AgentId best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (AgentId j : ids) {
      if (j == i || assigned.count(j)) continue;
      const double c = cost_distance(si, states.at(j), gi, cfg);
      if (best == -1 || c < best_cost) {
        best = j;
        best_cost = c;
      }
    }
    if (best == -1) continue;
    const double d = euclidean(si.p, states.at(best).p);
    if (!(d < cfg.d_tol && best_cost < cfg.c_tol)) continue;

    Group group{std::min(i, best), std::max(i, best)};
    assigned.insert(i);
    assigned.insert(best);
    out.events.push_back({EventKind::Pair, {i}, {best}, best_cost, d});

    for (AgentId k : ids) {
      if (assigned.count(k)) continue;
      const Group single{k};
      const auto chk = check_linkage(group, single, states, goals, cfg);
      if (!chk.accepted) continue;
      out.events.push_back({EventKind::Merge, group, single, chk.cost, chk.hd});
      group = merged_members(group, single);
      assigned.insert(k);
    }
    out.groups.push_back(std::move(group));
  }
  for (AgentId i : ids)
    if (!assigned.count(i)) out.groups.push_back({i});
  return out;
}

}  // namespace

ClusteringResult pair_agents(const StateMap& states, const GoalMap& goals, const Config& cfg, ClusterId first_id) {
  auto paired = pair_groups(states, goals, cfg);
  ClusteringResult r;
  r.clusters = build_set(std::move(paired.groups), states, goals, cfg, first_id);
  r.log.events = std::move(paired.events);
  return r;
}

void merge_pass(ClusteringResult& r, const GoalMap& goals, const Config& cfg) {
  auto groups = groups_of(r.clusters);
  const auto before = groups.size();
  merge_groups_to_fixed_point(groups, r.clusters.agent_states, goals, cfg, r.log.events);
  if (groups.size() == before) return;
  const ClusterId first = r.clusters.clusters.empty() ? r.clusters.next_id : r.clusters.clusters.front().id;
  r.clusters = build_set(std::move(groups), r.clusters.agent_states, goals, cfg, first);
}

ClusteringResult cluster_agents(const StateMap& states, const GoalMap& goals, const Config& cfg,
                                ClusterId first_id) {
  auto paired = pair_groups(states, goals, cfg);
  merge_groups_to_fixed_point(paired.groups, states, goals, cfg, paired.events);
  ClusteringResult r;
  r.clusters = build_set(std::move(paired.groups), states, goals, cfg, first_id);
  r.log.events = std::move(paired.events);
  return r;
}

ClusteringResult adopt_partition(const ClusterSet& prior, const std::vector<std::vector<AgentId>>& partition,
                                 const StateMap& states, const GoalMap& goals, const Config& cfg, int step,
                                 std::vector<ClusteringEvent> formation_events) {
  std::vector<Group> groups = partition;
  sort_groups(groups);

  ClusteringResult r;
  r.log.step = step;
  auto& cs = r.clusters;
  cs.agent_states = states;
  cs.next_id = prior.next_id;
  for (const auto& [id, s] : states) {
    auto it = prior.missed.find(id);
    cs.missed[id] = it == prior.missed.end() ? 0 : it->second;
  }

  std::map<Group, const Cluster*> prior_by_members;
  for (const auto& c : prior.clusters) prior_by_members[c.members] = &c;

  std::map<AgentId, std::size_t> group_of;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (AgentId a : groups[g]) group_of[a] = g;

  for (auto& g : groups) {
    auto it = prior_by_members.find(g);
    if (it != prior_by_members.end()) {
      Cluster c = *it->second;
      c.mean = mean_state(c.members, states);
      c.goal = centroid_goal(c.members, goals);
      cs.clusters.push_back(std::move(c));
    } else {
      cs.clusters.push_back(make_cluster(cs.next_id++, g, states, goals, cfg));
    }
  }

  for (const auto& c : prior.clusters) {
    if (c.size() < 2) continue;
    std::set<std::size_t> landed;
    for (AgentId a : c.members) {
      auto it = group_of.find(a);
      if (it != group_of.end()) landed.insert(it->second);
    }
    if (landed.size() > 1) r.log.events.push_back({EventKind::Split, c.members, {}, NAN, NAN});
  }
  // Formation steps are logged only for groups that did not already exist.
  for (auto& e : formation_events) {
    const AgentId a = e.first.empty() ? (e.second.empty() ? -1 : e.second.front()) : e.first.front();
    auto it = group_of.find(a);
    if (it != group_of.end() && prior_by_members.count(groups[it->second])) continue;
    r.log.events.push_back(std::move(e));
  }
  return r;
}

ClusteringResult recluster(const ClusterSet& prior, const StateMap& updated_states, const GoalMap& goals,
                           const Config& cfg, int step) {
  auto fresh = cluster_agents(updated_states, goals, cfg);
  return adopt_partition(prior, fresh.clusters.partition(), updated_states, goals, cfg, step,
                         std::move(fresh.log.events));
}

Clusterer cost_distance_clusterer() {
  return [](const ClusterSet& prior, const StateMap& states, const GoalMap& goals, const Config& cfg, int step) {
    return recluster(prior, states, goals, cfg, step);
  };
}

ClusteringResult insert_agents(const ClusterSet& cs, const StateMap& new_obs, const GoalMap& goals, const Config& cfg,
                               int step, const Clusterer& clusterer) {
  ClusterSet grown = cs;
  std::vector<ClusteringEvent> inserts;
  for (const auto& [id, s] : new_obs) {
    if (grown.agent_states.count(id)) throw std::invalid_argument("insert_agents: agent " + std::to_string(id) +
                                                                  " is already live");
    grown.agent_states[id] = s;
    grown.missed[id] = 0;
    inserts.push_back({EventKind::Insert, {id}, {}, NAN, NAN});
  }
  for (const auto& [id, s] : new_obs)
    grown.clusters.push_back(make_cluster(grown.next_id++, {id}, grown.agent_states, goals, cfg));

  auto r = clusterer(grown, grown.agent_states, goals, cfg, step);
  r.log.step = step;
  r.log.events.insert(r.log.events.begin(), inserts.begin(), inserts.end());
  return r;
}

ClusteringResult delete_agents(const ClusterSet& cs, const std::vector<AgentId>& missing, const GoalMap& goals,
                               const Config& cfg, int step) {
  const std::set<AgentId> miss(missing.begin(), missing.end());
  for (AgentId a : miss)
    if (!cs.agent_states.count(a))
      throw std::invalid_argument("delete_agents: agent " + std::to_string(a) + " is not live");

  ClusteringResult r;
  r.log.step = step;
  ClusterSet& out = r.clusters;
  out = cs;
  std::set<AgentId> removed;
  for (const auto& [id, s] : cs.agent_states) {
    int& n = out.missed[id];
    n = miss.count(id) ? n + 1 : 0;
    if (n > cfg.deletion_grace) removed.insert(id);
  }
  if (removed.empty()) return r;

  for (AgentId a : removed) {
    out.agent_states.erase(a);
    out.missed.erase(a);
    r.log.events.push_back({EventKind::Delete, {a}, {}, NAN, NAN});
  }
  std::vector<Cluster> kept;
  for (const auto& c : cs.clusters) {
    Group left;
    for (AgentId a : c.members)
      if (!removed.count(a)) left.push_back(a);
    if (left.empty()) continue;
    if (left.size() == c.size()) {
      kept.push_back(c);
    } else {
      kept.push_back(make_cluster(c.id, std::move(left), out.agent_states, goals, cfg));
    }
  }
  out.clusters = std::move(kept);
  return r;
}

std::vector<std::vector<AgentId>> replay(const ClusterSet& prior, const ClusteringDecisionLog& log) {
  std::vector<Group> groups = groups_of(prior);
  auto find = [&](AgentId a) -> std::ptrdiff_t {
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (std::find(groups[g].begin(), groups[g].end(), a) != groups[g].end()) return static_cast<std::ptrdiff_t>(g);
    return -1;
  };
  auto detach = [&](AgentId a) {
    const auto g = find(a);
    if (g < 0) return;
    auto& grp = groups[static_cast<std::size_t>(g)];
    grp.erase(std::remove(grp.begin(), grp.end(), a), grp.end());
    if (grp.empty()) groups.erase(groups.begin() + g);
  };
  for (const auto& e : log.events) {
    switch (e.kind) {
      case EventKind::Delete:
        for (AgentId a : e.first) detach(a);
        break;
      case EventKind::Insert:
        for (AgentId a : e.first)
          if (find(a) < 0) groups.push_back({a});
        break;
      case EventKind::Split:
        for (AgentId a : e.first) {
          detach(a);
          groups.push_back({a});
        }
        break;
      case EventKind::Pair:
      case EventKind::Merge: {
        if (e.first.empty() || e.second.empty()) break;
        auto gi = find(e.first.front());
        auto gj = find(e.second.front());
        if (gi < 0 || gj < 0 || gi == gj) break;
        auto joined = merged_members(groups[static_cast<std::size_t>(gi)], groups[static_cast<std::size_t>(gj)]);
        groups[static_cast<std::size_t>(gi)] = std::move(joined);
        groups.erase(groups.begin() + gj);
        break;
      }
    }
  }
  sort_groups(groups);
  return groups;
}

nlohmann::json to_json(const ClusteringEvent& e, int step) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"step", step},         {"kind", to_string(e.kind)}, {"first", e.first},
          {"second", e.second},   {"cost", num(e.cost)},       {"distance", num(e.distance)}};
}

ClusteringEvent event_from_json(const nlohmann::json& j) {
  ClusteringEvent e;
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.first = j.at("first").get<std::vector<AgentId>>();
  e.second = j.at("second").get<std::vector<AgentId>>();
  e.cost = j.at("cost").is_null() ? NAN : j.at("cost").get<double>();
  e.distance = j.at("distance").is_null() ? NAN : j.at("distance").get<double>();
  return e;
}

void write_log_jsonl(std::ostream& os, const std::vector<ClusteringDecisionLog>& logs) {
  for (const auto& log : logs)
    for (const auto& e : log.events) os << to_json(e, log.step).dump() << '\n';
}

}  // namespace swarm
