#include "swarm/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "swarm/io.hpp"

namespace swarm {

AdeFde ade_fde(std::span<const Vec2> pred, std::span<const Vec2> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("ade_fde: trajectory lengths differ");
  if (pred.empty()) throw std::invalid_argument("ade_fde: empty trajectory");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) sum += (pred[k] - truth[k]).norm();
  return {sum / static_cast<double>(pred.size()), (pred.back() - truth.back()).norm()};
}

MetricsReport evaluate_run(const PredictionRun& run, const Scene& scene) {
  MetricsReport rep;
  for (const auto& cs : run.snapshots) rep.cluster_counts.push_back(static_cast<int>(cs.clusters.size()));
  for (const auto& [id, traj] : run.trajectories) {
    std::vector<Vec2> pred, truth;
    for (const auto& [k, s] : traj) {
      if (k == 0) continue;
      const auto t = scene.state_at(static_cast<std::size_t>(k), id);
      if (!t) continue;
      pred.push_back(s.p);
      truth.push_back(t->p);
    }
    if (pred.empty()) continue;
    const auto m = ade_fde(pred, truth);
    rep.per_agent[id] = m;
    rep.ade_sum += m.ade;
    rep.fde_sum += m.fde;
  }
  if (!rep.per_agent.empty()) {
    rep.ade_mean = rep.ade_sum / static_cast<double>(rep.per_agent.size());
    rep.fde_mean = rep.fde_sum / static_cast<double>(rep.per_agent.size());
  }
  return rep;
}

std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_pts) {
  const std::size_t n = points.size();
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  auto region = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j)
      if ((points[i] - points[j]).norm() <= eps) out.push_back(j);
    return out;
  };
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto seeds = region(i);
    if (static_cast<int>(seeds.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const std::size_t q = seeds[s];
      if (label[q] == kNoise) label[q] = cluster;
      if (label[q] != kUnvisited) continue;
      label[q] = cluster;
      auto more = region(q);
      if (static_cast<int>(more.size()) >= min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
    }
    ++cluster;
  }
  return label;
}

namespace {

struct EdPartition {
  std::vector<std::vector<AgentId>> groups;
  std::vector<ClusteringEvent> events;
};

EdPartition ed_partition(const StateMap& states, const Config& cfg) {
  std::vector<AgentId> ids;
  std::vector<Vec2> pts;
  for (const auto& [id, s] : states) {
    ids.push_back(id);
    pts.push_back(s.p);
  }
  const auto labels = dbscan(pts, cfg.d_tol, 2);
  std::map<int, std::vector<AgentId>> by_label;
  EdPartition out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (labels[i] < 0)
      out.groups.push_back({ids[i]});
    else
      by_label[labels[i]].push_back(ids[i]);
  }
  for (auto& [l, members] : by_label) {
    for (std::size_t k = 1; k < members.size(); ++k)
      out.events.push_back({EventKind::Pair, {members[k - 1]}, {members[k]}, NAN,
                            (states.at(members[k - 1]).p - states.at(members[k]).p).norm()});
    out.groups.push_back(std::move(members));
  }
  return out;
}

}  // namespace

ClusterSet ed_baseline_cluster(const StateMap& states, const GoalMap& goals, const Config& cfg) {
  auto part = ed_partition(states, cfg);
  return adopt_partition(ClusterSet{}, part.groups, states, goals, cfg, 0, {}).clusters;
}

Clusterer ed_baseline_clusterer() {
  return [](const ClusterSet& prior, const StateMap& states, const GoalMap& goals, const Config& cfg, int step) {
    auto part = ed_partition(states, cfg);
    return adopt_partition(prior, part.groups, states, goals, cfg, step, std::move(part.events));
  };
}

namespace {

ComparisonRow run_arm(const Scene& scene, const Config& cfg, const CompareOptions& opts, bool cost_distance,
                      double* best_time) {
  RunOptions ro;
  ro.observation_stride = opts.observation_stride;
  ro.oracle_goals = opts.oracle_goals;
  ro.clusterer = cost_distance ? cost_distance_clusterer() : ed_baseline_clusterer();
  const auto t0 = std::chrono::steady_clock::now();
  const PredictionRun pr = run(scene, cfg, ro);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  *best_time = std::min(*best_time, secs);
  const auto m = evaluate_run(pr, scene);
  ComparisonRow row;
  row.scene = scene.scene_id;
  row.type = cost_distance ? "CD" : "ED";
  row.fde = m.fde_sum;
  row.ade = m.ade_sum;
  row.predict_calls = pr.stats.predict_calls;
  row.update_calls = pr.stats.update_calls;
  return row;
}

std::pair<ComparisonRow, ComparisonRow> compare_scene(const Scene& scene, const Config& cfg,
                                                      const CompareOptions& opts) {
  double ed_time = std::numeric_limits<double>::infinity();
  double cd_time = ed_time;
  ComparisonRow ed, cd;
  for (int r = 0; r < std::max(1, opts.repeats); ++r) {
    ed = run_arm(scene, cfg, opts, false, &ed_time);
    cd = run_arm(scene, cfg, opts, true, &cd_time);
  }
  ed.time_s = ed_time;
  cd.time_s = cd_time;
  return {ed, cd};
}

}  // namespace

std::vector<ComparisonRow> compare_cd_ed(const std::vector<Scene>& scenes, const Config& cfg_in,
                                         const CompareOptions& opts) {
  const Config cfg = validate_config(cfg_in);
  std::vector<std::pair<ComparisonRow, ComparisonRow>> results(scenes.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, opts.threads));
  for (std::size_t base = 0; base < scenes.size(); base += workers) {
    std::vector<std::future<std::pair<ComparisonRow, ComparisonRow>>> batch;
    for (std::size_t i = base; i < std::min(scenes.size(), base + workers); ++i)
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                 [&, i] { return compare_scene(scenes[i], cfg, opts); }));
    for (std::size_t i = 0; i < batch.size(); ++i) results[base + i] = batch[i].get();
  }
  std::vector<ComparisonRow> rows;
  for (auto& [ed, cd] : results) {
    rows.push_back(std::move(ed));
    rows.push_back(std::move(cd));
  }
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "scene,type,time_s,fde,ade\n";
  for (const auto& r : rows)
    out << r.scene << ',' << r.type << ',' << format_double(r.time_s) << ',' << format_double(r.fde) << ','
        << format_double(r.ade) << '\n';
}

void write_comparison_text(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.scene.size());
  const auto flags = out.flags();
  out << std::left << std::setw(static_cast<int>(w) + 2) << "Scene" << std::setw(6) << "Type" << std::right
      << std::setw(12) << "Time" << std::setw(12) << "FDE" << std::setw(12) << "ADE" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& r : rows)
    out << std::left << std::setw(static_cast<int>(w) + 2) << r.scene << std::setw(6) << r.type << std::right
        << std::setw(12) << r.time_s << std::setw(12) << r.fde << std::setw(12) << r.ade << '\n';
  out.flags(flags);
}

std::vector<LambdaTimeline> lambda_sweep(const Scene& scene, const std::vector<double>& lambda_grid, const Config& cfg,
                                         const RunOptions& opts, int threads) {
  for (double l : lambda_grid)
    if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("lambda_sweep: lambda1 must lie in [0, 1]");
  auto one = [&](double l1) {
    Config c = cfg;
    c.lambda1 = l1;
    c.lambda2 = 1.0 - l1;
    LambdaTimeline t;
    t.lambda1 = c.lambda1;
    t.lambda2 = c.lambda2;
    const auto pr = run(scene, c, opts);
    for (const auto& cs : pr.snapshots) t.partitions.push_back(cs.partition());
    t.metrics = evaluate_run(pr, scene);
    return t;
  };
  std::vector<LambdaTimeline> out(lambda_grid.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t base = 0; base < lambda_grid.size(); base += workers) {
    std::vector<std::future<LambdaTimeline>> batch;
    for (std::size_t i = base; i < std::min(lambda_grid.size(), base + workers); ++i)
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                 [&, i] { return one(lambda_grid[i]); }));
    for (std::size_t i = 0; i < batch.size(); ++i) out[base + i] = batch[i].get();
  }
  return out;
}

void write_timeline_csv(std::ostream& out, const LambdaTimeline& t) {
  out << "step,agent_id,cluster_index,cluster_size\n";
  for (std::size_t k = 0; k < t.partitions.size(); ++k)
    for (std::size_t c = 0; c < t.partitions[k].size(); ++c)
      for (AgentId a : t.partitions[k][c]) out << k << ',' << a << ',' << c << ',' << t.partitions[k][c].size() << '\n';
}

}  // namespace swarm
