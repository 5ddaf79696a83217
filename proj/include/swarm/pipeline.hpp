#pragma once

// Cluster motion prediction: initial grouping, per-step UKF predict/update of
// every cluster, insertion/deletion of agents, re-clustering, and the
// Gaussian-mixture occupancy density of the cluster set.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarm/clustering.hpp"
#include "swarm/model.hpp"
#include "swarm/scene.hpp"

namespace swarm {

struct GaussianComponent {
  double weight = 0.0;
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
  ClusterId cluster_id = -1;
};

struct MixtureDensity {
  std::vector<GaussianComponent> components;
  double time = 0.0;
};

// One component per cluster, weighted by member count over live agents.
MixtureDensity density_of(const ClusterSet& cs, double time = 0.0);

// Full-state (d = 4) mixture density.
double eval_density(const MixtureDensity& d, const Vec4& x);
// Position marginal: each component restricted to its 2x2 position block.
double eval_position_density(const MixtureDensity& d, const Vec2& p);

struct PipelineStats {
  long predict_calls = 0;
  long update_calls = 0;
  long clustering_calls = 0;
  long regularized_updates = 0;
};

// pre: states non-empty; throws std::invalid_argument otherwise.
ClusterSet init_run(const StateMap& states, const GoalMap& goals, const Config& cfg,
                    const Clusterer& clusterer = cost_distance_clusterer(), ClusteringDecisionLog* log = nullptr);

struct StepOutput {
  ClusterSet clusters;
  MixtureDensity density;
  ClusteringDecisionLog log;
};

// Advances the cluster set by one frame of length dt. `observations` is empty
// on prediction-only frames; when present it lists every agent measured this
// frame (position, optional velocity used only to initialise new agents).
StepOutput step_run(const ClusterSet& cs, const std::optional<Frame>& observations, const GoalMap& goals,
                    const Config& cfg, double dt, int step, const Clusterer& clusterer = cost_distance_clusterer(),
                    PipelineStats* stats = nullptr);

enum class GoalSource { Scene, FinalPosition, ConstantVelocity };
std::string_view to_string(GoalSource s);

struct RunOptions {
  // Frames k > 0 with k % stride == 0 carry measurements; nullopt means never.
  std::optional<int> observation_stride = 1;
  Clusterer clusterer = cost_distance_clusterer();
  // Allow the final truth position as goal when the scene has none.
  bool oracle_goals = true;
};

struct PredictionRun {
  std::string scene_id;
  double dt = 0.0;
  std::optional<int> observation_stride;
  std::vector<ClusterSet> snapshots;
  std::vector<MixtureDensity> densities;
  std::vector<ClusteringDecisionLog> logs;
  std::map<AgentId, std::map<int, AgentState>> trajectories;
  GoalMap goals;
  std::map<AgentId, GoalSource> goal_sources;
  PipelineStats stats;
};

// Goal provisioning: scene goal, else final truth position (if oracle_goals),
// else constant-velocity extrapolation over T_f_cost from first appearance.
GoalMap provision_goals(const Scene& scene, const Config& cfg, bool oracle_goals,
                        std::map<AgentId, GoalSource>* sources = nullptr);

PredictionRun run(const Scene& scene, const Config& cfg, const RunOptions& opts = {});

}  // namespace swarm
