#include <doctest.h>

#include <random>

#include "swarm/model.hpp"

using namespace swarm;

TEST_CASE("default config is valid") {
  const Config cfg;
  CHECK_NOTHROW(validate_config(cfg));
  CHECK(cfg.K_p == -1.0);
  CHECK(cfg.K_v == -2.0);
  CHECK(cfg.d_tol == 2.0);
  CHECK(cfg.c_tol == 10.0);
  CHECK(cfg.lambda1 == 0.5);
  CHECK(cfg.lambda2 == 0.5);
  CHECK(cfg.dt == 0.1);
}

TEST_CASE("config violations name the field") {
  Config cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "dt must be positive", ConfigError);

  cfg = Config{};
  cfg.K_p = 1.0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "K_p must be negative for stable goal seeking", ConfigError);

  // Positive K_p gives a closed-loop eigenvalue with positive real part:
  // s^2 - K_v s - K_p = 0 has a positive root when K_p > 0.
  const double kv = -2.0, kp = 1.0;
  const double root = (kv + std::sqrt(kv * kv + 4.0 * kp)) / 2.0;
  CHECK(root > 0.0);

  cfg = Config{};
  cfg.lambda1 = 0.0;
  cfg.lambda2 = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = Config{};
  cfg.sigma_v = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("config json round trip and unknown keys") {
  Config cfg;
  cfg.c_tol = 3.5;
  cfg.seed = 42;
  cfg.linkage_positions_only = true;
  const Config back = config_from_json(config_to_json(cfg));
  CHECK(back.c_tol == 3.5);
  CHECK(back.seed == 42);
  CHECK(back.linkage_positions_only);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"no_such_field", 1}}), ConfigError);
}

TEST_CASE("set_config_field parses by type") {
  Config cfg;
  set_config_field(cfg, "d_tol", "1.5");
  set_config_field(cfg, "deletion_grace", "4");
  set_config_field(cfg, "scale_cluster_meas_noise", "true");
  CHECK(cfg.d_tol == 1.5);
  CHECK(cfg.deletion_grace == 4);
  CHECK(cfg.scale_cluster_meas_noise);
  CHECK_THROWS_AS(set_config_field(cfg, "bogus", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_field(cfg, "d_tol", "abc"), ConfigError);
  for (const auto& f : config_fields()) CHECK(!f.help.empty());
}

TEST_CASE("singleton cluster uses the diagonal covariance") {
  Config cfg;
  StateMap states{{7, AgentState{Vec2(1, 2), Vec2(0.5, 0)}}};
  GoalMap goals{{7, Goal{Vec2(5, 2), Vec2::Zero()}}};
  const Cluster c = make_cluster(3, {7}, states, goals, cfg);
  CHECK(c.id == 3);
  CHECK(c.is_singleton());
  CHECK(c.mean == states[7]);
  Mat4 expected = Mat4::Zero();
  expected.diagonal() << cfg.sigma_p, cfg.sigma_p, cfg.sigma_v, cfg.sigma_v;
  CHECK(c.cov == expected);
}

TEST_CASE("cluster mean is the member average and covariance is symmetric PSD") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  Config cfg;
  for (int trial = 0; trial < 50; ++trial) {
    StateMap states;
    GoalMap goals;
    std::vector<AgentId> ids;
    const int m = 2 + trial % 5;
    Vec4 sum = Vec4::Zero();
    for (int i = 0; i < m; ++i) {
      AgentState s{Vec2(n(rng), n(rng)), Vec2(n(rng), n(rng))};
      states[i + 1] = s;
      goals[i + 1] = Goal{Vec2(n(rng), n(rng)), Vec2::Zero()};
      ids.push_back(i + 1);
      sum += s.vector();
    }
    const Cluster c = make_cluster(0, ids, states, goals, cfg);
    CHECK((c.mean.vector() - sum / m).norm() < 1e-12);
    CHECK(is_symmetric(c.cov));
    CHECK(is_psd(c.cov));
  }
}

TEST_CASE("partition check") {
  ClusterSet cs;
  cs.agent_states = {{1, {}}, {2, {}}, {3, {}}};
  Cluster a;
  a.members = {1, 2};
  Cluster b;
  b.members = {3};
  cs.clusters = {a, b};
  CHECK(cs.is_partition());
  cs.clusters[1].members = {2};
  CHECK_FALSE(cs.is_partition());
}

TEST_CASE("cluster set json round trip") {
  Config cfg;
  StateMap states{{1, AgentState{Vec2(0, 0), Vec2(1, 0)}}, {2, AgentState{Vec2(1, 0), Vec2(1, 0)}}};
  GoalMap goals{{1, Goal{Vec2(9, 0), Vec2::Zero()}}, {2, Goal{Vec2(10, 0), Vec2::Zero()}}};
  ClusterSet cs;
  cs.agent_states = states;
  cs.clusters.push_back(make_cluster(4, {1, 2}, states, goals, cfg));
  cs.missed = {{1, 0}, {2, 1}};
  cs.next_id = 5;
  nlohmann::json j = cs;
  const ClusterSet back = j.get<ClusterSet>();
  CHECK(back.next_id == 5);
  CHECK(back.missed.at(2) == 1);
  CHECK(back.clusters.at(0).members == std::vector<AgentId>{1, 2});
  CHECK((back.clusters[0].cov - cs.clusters[0].cov).norm() == 0.0);
  CHECK(back.agent_states.at(2) == states.at(2));
}
