#pragma once

// Displacement metrics, the density-based Euclidean clustering baseline, the
// cost-distance vs Euclidean comparison, and the lambda sweep.

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "swarm/pipeline.hpp"
#include "swarm/scene.hpp"

namespace swarm {

struct AdeFde {
  double ade = 0.0;
  double fde = 0.0;
};

// Mean and final position error of aligned trajectories; throws on length
// mismatch or empty input.
AdeFde ade_fde(std::span<const Vec2> pred, std::span<const Vec2> truth);

struct MetricsReport {
  std::map<AgentId, AdeFde> per_agent;
  double ade_sum = 0.0;
  double fde_sum = 0.0;
  double ade_mean = 0.0;
  double fde_mean = 0.0;
  double wall_seconds = 0.0;
  std::vector<int> cluster_counts;  // per step
};

// Compares each agent's estimate against truth over frames 1..K-1 where both
// exist (frame 0 is the initial condition).
MetricsReport evaluate_run(const PredictionRun& run, const Scene& scene);

// DBSCAN over positions with the given radius; a point is core when at least
// min_pts points (itself included) lie within eps. Returns cluster labels, -1
// for noise.
std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_pts);

// eps = d_tol, min_pts = 2; noise points become singletons.
ClusterSet ed_baseline_cluster(const StateMap& states, const GoalMap& goals, const Config& cfg);
Clusterer ed_baseline_clusterer();

struct ComparisonRow {
  std::string scene;
  std::string type;  // "ED" or "CD"
  double time_s = 0.0;
  double fde = 0.0;
  double ade = 0.0;
  long predict_calls = 0;
  long update_calls = 0;
};

struct CompareOptions {
  std::optional<int> observation_stride = 1;
  int repeats = 3;  // wall clock is the fastest of this many runs
  bool oracle_goals = true;
  int threads = 1;
};

// Two rows per scene, ED first then CD, identical pipeline except clustering.
std::vector<ComparisonRow> compare_cd_ed(const std::vector<Scene>& scenes, const Config& cfg,
                                         const CompareOptions& opts = {});

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
void write_comparison_text(std::ostream& out, const std::vector<ComparisonRow>& rows);

struct LambdaTimeline {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<std::vector<std::vector<AgentId>>> partitions;  // per step
  MetricsReport metrics;
};

// One pipeline run per lambda1 in the grid with lambda2 = 1 - lambda1.
std::vector<LambdaTimeline> lambda_sweep(const Scene& scene, const std::vector<double>& lambda_grid, const Config& cfg,
                                         const RunOptions& opts = {}, int threads = 1);

// step,agent_id,cluster_index where cluster_index orders clusters by smallest member.
void write_timeline_csv(std::ostream& out, const LambdaTimeline& t);

}  // namespace swarm
