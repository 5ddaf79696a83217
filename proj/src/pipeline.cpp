#include "swarm/pipeline.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "swarm/filter.hpp"

namespace swarm {

MixtureDensity density_of(const ClusterSet& cs, double time) {
  if (cs.clusters.empty()) throw std::invalid_argument("density_of: no clusters");
  std::size_t total = 0;
  for (const auto& c : cs.clusters) total += c.size();
  MixtureDensity d;
  d.time = time;
  for (const auto& c : cs.clusters)
    d.components.push_back({static_cast<double>(c.size()) / static_cast<double>(total), c.mean.vector(), c.cov, c.id});
  return d;
}

namespace {

template <int N>
double gaussian(const Eigen::Matrix<double, N, 1>& x, const Eigen::Matrix<double, N, 1>& mu,
                const Eigen::Matrix<double, N, N>& cov) {
  using Mat = Eigen::Matrix<double, N, N>;
  const Mat sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Mat> llt(sym);
  for (double jitter = 1e-12; llt.info() != Eigen::Success; jitter *= 10.0) {
    if (jitter > 1e-6 * (1 + 1e-9)) throw std::runtime_error("mixture component covariance is singular");
    llt.compute(sym + jitter * Mat::Identity());
  }
  const Eigen::Matrix<double, N, 1> y = llt.matrixL().solve(x - mu);
  double log_det = 0.0;
  for (int i = 0; i < N; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  const double log_norm = -0.5 * N * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  return std::exp(log_norm - 0.5 * y.squaredNorm());
}

}  // namespace

double eval_density(const MixtureDensity& d, const Vec4& x) {
  double acc = 0.0;
  for (const auto& c : d.components) acc += c.weight * gaussian<4>(x, c.mean, c.cov);
  return acc;
}

double eval_position_density(const MixtureDensity& d, const Vec2& p) {
  double acc = 0.0;
  for (const auto& c : d.components)
    acc += c.weight * gaussian<2>(p, Vec2(c.mean.head<2>()), Mat2(c.cov.topLeftCorner<2, 2>()));
  return acc;
}

ClusterSet init_run(const StateMap& states, const GoalMap& goals, const Config& cfg, const Clusterer& clusterer,
                    ClusteringDecisionLog* log) {
  if (states.empty()) throw std::invalid_argument("init_run: no agents in the initial frame");
  ClusterSet empty;
  auto r = clusterer(empty, states, goals, cfg, 0);
  if (log) *log = std::move(r.log);
  return std::move(r.clusters);
}

namespace {

ForceField field_for(const ClusterSet& cs, const Cluster& self, const Config& cfg) {
  std::vector<Neighbor> neighbors;
  for (const auto& other : cs.clusters)
    if (other.id != self.id) neighbors.push_back({other.mean, cfg.radius_default});
  return ForceField::from_config(std::move(neighbors), cfg.radius_default, cfg);
}

}  // namespace

StepOutput step_run(const ClusterSet& cs, const std::optional<Frame>& observations, const GoalMap& goals,
                    const Config& cfg, double dt, int step, const Clusterer& clusterer, PipelineStats* stats) {
  PipelineStats local;
  PipelineStats& st = stats ? *stats : local;

  const int substeps = std::max(1, static_cast<int>(std::lround(dt / cfg.dt)));
  const double h = dt / substeps;

  ClusterSet next = cs;
  for (auto& c : next.clusters) {
    const ForceField field = field_for(cs, c, cfg);
    const SigmaSet sig = c.is_singleton() ? sigma_points_singleton(c.mean, c.cov, cfg)
                                          : sigma_points_cluster(c, cs.agent_states);
    const Prediction pred = predict(sig, c.goal, field, cfg, h, substeps, &goals);
    ++st.predict_calls;

    Vec4 mean = pred.mean;
    Mat4 cov = pred.cov;
    if (observations) {
      Vec2 z = Vec2::Zero();
      int seen = 0;
      for (AgentId a : c.members) {
        auto it = observations->find(a);
        if (it == observations->end()) continue;
        z += it->second.p;
        ++seen;
      }
      if (seen > 0) {
        const Posterior post = update(pred, z / seen, MeasurementModel::from_config(cfg, seen));
        ++st.update_calls;
        if (post.regularized) ++st.regularized_updates;
        mean = post.mean;
        cov = post.cov;
      }
    }

    if (c.is_singleton()) {
      next.agent_states[c.members.front()] = AgentState::from_vector(mean);
      c.mean = AgentState::from_vector(mean);
    } else {
      for (const auto& [id, s] : redistribute_members(c, mean, pred)) next.agent_states[id] = s;
      c.mean = mean_state(c.members, next.agent_states);
    }
    c.cov = cov;
  }

  StepOutput out;
  ClusteringResult r;
  if (observations) {
    std::vector<AgentId> missing;
    for (const auto& [id, s] : next.agent_states)
      if (!observations->count(id)) missing.push_back(id);
    auto del = delete_agents(next, missing, goals, cfg, step);

    StateMap fresh;
    for (const auto& [id, o] : *observations)
      if (!del.clusters.agent_states.count(id)) fresh[id] = AgentState{o.p, o.v.value_or(Vec2::Zero())};

    if (!fresh.empty())
      r = insert_agents(del.clusters, fresh, goals, cfg, step, clusterer);
    else
      r = clusterer(del.clusters, del.clusters.agent_states, goals, cfg, step);
    r.log.events.insert(r.log.events.begin(), del.log.events.begin(), del.log.events.end());
  } else {
    r = clusterer(next, next.agent_states, goals, cfg, step);
  }
  ++st.clustering_calls;

  out.clusters = std::move(r.clusters);
  out.log = std::move(r.log);
  out.log.step = step;
  if (!out.clusters.clusters.empty()) out.density = density_of(out.clusters, step * dt);
  out.density.time = step * dt;
  return out;
}

std::string_view to_string(GoalSource s) {
  switch (s) {
    case GoalSource::Scene: return "scene";
    case GoalSource::FinalPosition: return "final_position";
    case GoalSource::ConstantVelocity: return "constant_velocity";
  }
  return "unknown";
}

GoalMap provision_goals(const Scene& scene, const Config& cfg, bool oracle_goals,
                        std::map<AgentId, GoalSource>* sources) {
  GoalMap goals;
  for (AgentId id : scene.agent_ids()) {
    GoalSource src;
    if (auto it = scene.goals.find(id); it != scene.goals.end()) {
      goals[id] = it->second;
      src = GoalSource::Scene;
    } else if (oracle_goals) {
      goals[id] = Goal{scene.frames[*scene.last_frame_of(id)].at(id).p, Vec2::Zero()};
      src = GoalSource::FinalPosition;
    } else {
      const auto first = *scene.first_frame_of(id);
      const auto s = *scene.state_at(first, id);
      goals[id] = Goal{s.p + s.v * cfg.T_f_cost, Vec2::Zero()};
      src = GoalSource::ConstantVelocity;
    }
    if (sources) (*sources)[id] = src;
  }
  return goals;
}

PredictionRun run(const Scene& scene, const Config& cfg_in, const RunOptions& opts) {
  const Config cfg = validate_config(cfg_in);
  if (scene.frames.empty()) throw std::invalid_argument("run: scene has no frames");
  if (scene.frames.front().empty()) throw std::invalid_argument("run: scene has no agents in its first frame");
  if (!(scene.dt > 0)) throw std::invalid_argument("run: scene dt must be positive");
  if (opts.observation_stride && *opts.observation_stride < 1)
    throw std::invalid_argument("run: stride must be >= 1");

  PredictionRun out;
  out.scene_id = scene.scene_id;
  out.dt = scene.dt;
  out.observation_stride = opts.observation_stride;
  out.goals = provision_goals(scene, cfg, opts.oracle_goals, &out.goal_sources);

  StateMap initial;
  for (const auto& [id, o] : scene.frames.front()) initial[id] = AgentState{o.p, o.v.value_or(Vec2::Zero())};

  ClusteringDecisionLog log0;
  ClusterSet cs = init_run(initial, out.goals, cfg, opts.clusterer, &log0);
  ++out.stats.clustering_calls;
  out.logs.push_back(std::move(log0));
  out.densities.push_back(density_of(cs, 0.0));
  for (const auto& [id, s] : cs.agent_states) out.trajectories[id][0] = s;
  out.snapshots.push_back(cs);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.meas_noise_std);

  for (std::size_t k = 1; k < scene.frames.size(); ++k) {
    std::optional<Frame> obs;
    if (opts.observation_stride && k % static_cast<std::size_t>(*opts.observation_stride) == 0) {
      obs.emplace();
      for (const auto& [id, o] : scene.frames[k]) {
        const double nx = noise(rng);
        const double ny = noise(rng);
        (*obs)[id] = Observation{o.p + Vec2(nx, ny), o.v};
      }
    }
    auto step = step_run(cs, obs, out.goals, cfg, scene.dt, static_cast<int>(k), opts.clusterer, &out.stats);
    cs = std::move(step.clusters);
    for (const auto& [id, s] : cs.agent_states) out.trajectories[id][static_cast<int>(k)] = s;
    out.snapshots.push_back(cs);
    out.densities.push_back(std::move(step.density));
    out.logs.push_back(std::move(step.log));
  }
  return out;
}

}  // namespace swarm
