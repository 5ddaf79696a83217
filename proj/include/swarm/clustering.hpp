#pragma once

// Geometric metrics and the cost/distance agglomerative grouping of agents:
// agent-agent pairing, complete-linkage cluster merging, and the
// re-cluster / insert / delete lifecycle of a ClusterSet.

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarm/model.hpp"

namespace swarm {

double euclidean(const Vec2& a, const Vec2& b);

// Symmetric Hausdorff distance between two non-empty point sets (exhaustive).
double hausdorff(std::span<const Vec2> x, std::span<const Vec2> y);

enum class EventKind { Pair, Merge, Split, Insert, Delete };

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

// `first`/`second` hold agent ids. Pair: the two agents. Merge: members of the
// absorbing and the absorbed cluster. Split: members of the prior cluster that
// dissolved. Insert/Delete: the affected agent.
struct ClusteringEvent {
  EventKind kind = EventKind::Pair;
  std::vector<AgentId> first;
  std::vector<AgentId> second;
  double cost = std::numeric_limits<double>::quiet_NaN();
  double distance = std::numeric_limits<double>::quiet_NaN();
};

struct ClusteringDecisionLog {
  int step = 0;
  std::vector<ClusteringEvent> events;
};

struct ClusteringResult {
  ClusterSet clusters;
  ClusteringDecisionLog log;
};

enum class MergeGate { None, Cost, Hausdorff };

struct MergeOutcome {
  std::optional<Cluster> merged;
  MergeGate rejected_by = MergeGate::None;
  AgentId farthest_i = -1;
  AgentId farthest_j = -1;
  double cost = 0.0;
  double hausdorff = 0.0;

  bool accepted() const { return merged.has_value(); }
};

// Complete-linkage test of C_I against C_J: the farthest cross pair must have
// cost distance below c_tol, then the member-position Hausdorff distance must
// not exceed d_tol. An accepted merge carries the id of C_I.
MergeOutcome merge_clusters(const Cluster& ci, const Cluster& cj, const StateMap& states, const GoalMap& goals,
                            const Config& cfg);

// Greedy agent-agent pairing from all singletons, scanning agents in ascending
// id order; each newly formed pair then absorbs remaining singletons that pass
// merge_clusters. Cluster ids are fresh, starting at first_id.
ClusteringResult pair_agents(const StateMap& states, const GoalMap& goals, const Config& cfg, ClusterId first_id = 0);

// Repeats cluster-cluster merges until no merge is accepted. For each cluster
// in order, the accepted partner with the smallest cost is absorbed.
void merge_pass(ClusteringResult& r, const GoalMap& goals, const Config& cfg);

// Full grouping of a state snapshot: pair_agents followed by merge_pass.
ClusteringResult cluster_agents(const StateMap& states, const GoalMap& goals, const Config& cfg,
                                ClusterId first_id = 0);

// Turns a fresh partition of prior's agents into a ClusterSet that keeps the
// prior cluster (id, covariance) whenever its member set is unchanged, emits a
// Split event for every prior cluster whose members no longer share a cluster,
// and places those splits ahead of `formation_events` in the returned log.
ClusteringResult adopt_partition(const ClusterSet& prior, const std::vector<std::vector<AgentId>>& partition,
                                 const StateMap& states, const GoalMap& goals, const Config& cfg, int step,
                                 std::vector<ClusteringEvent> formation_events);

// Discards prior groupings and regroups the current states from scratch.
ClusteringResult recluster(const ClusterSet& prior, const StateMap& updated_states, const GoalMap& goals,
                           const Config& cfg, int step = 0);

// Signature shared by the cost-distance grouping and baselines.
using Clusterer = std::function<ClusteringResult(const ClusterSet& prior, const StateMap& states,
                                                 const GoalMap& goals, const Config& cfg, int step)>;
Clusterer cost_distance_clusterer();

// New agents enter as singletons, then the clusterer regroups everything.
// Throws std::invalid_argument on an id that is already live.
ClusteringResult insert_agents(const ClusterSet& cs, const StateMap& new_obs, const GoalMap& goals, const Config& cfg,
                               int step = 0, const Clusterer& clusterer = cost_distance_clusterer());

// Registers one observation step: agents in `missing` accrue a miss, all
// others are reset. Agents missed more than deletion_grace consecutive steps
// are removed and their clusters rebuilt; emptied clusters disappear.
ClusteringResult delete_agents(const ClusterSet& cs, const std::vector<AgentId>& missing, const GoalMap& goals,
                               const Config& cfg, int step = 0);

// Replays a log onto the prior partition: Delete removes, Insert adds a
// singleton, Split dissolves a cluster, Pair/Merge join clusters.
std::vector<std::vector<AgentId>> replay(const ClusterSet& prior, const ClusteringDecisionLog& log);

nlohmann::json to_json(const ClusteringEvent& e, int step);
ClusteringEvent event_from_json(const nlohmann::json& j);
// One event per line.
void write_log_jsonl(std::ostream& os, const std::vector<ClusteringDecisionLog>& logs);

}  // namespace swarm
