#include "swarm/scenarios.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace swarm {

SynthSpec overtaking_spec() {
  SynthSpec s;
  s.scene_id = "overtaking";
  s.duration = 6.0;
  s.dt = 0.1;
  s.agents = {
      {1, AgentState{Vec2(0.0, 0.0), Vec2(1.5, 0.0)}, Vec2(12.0, 0.0)},
      {2, AgentState{Vec2(0.0, 1.0), Vec2(1.0, 0.0)}, Vec2(3.0, 1.0)},
      {3, AgentState{Vec2(4.0, 0.8), Vec2(1.5, 0.0)}, Vec2(13.0, 0.8)},
  };
  return s;
}

SynthSpec opposing_flow_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  SynthSpec s;
  s.scene_id = "opposing_" + std::to_string(seed);
  s.seed = seed;
  s.duration = 4.0;
  s.dt = 0.1;
  AgentId id = 1;
  // A file of walkers heading +x and one heading -x on a neighbouring lane.
  for (int k = 0; k < 2; ++k) {
    const double x = -1.5 * k + jitter(rng);
    s.agents.push_back({id++, AgentState{Vec2(x, jitter(rng)), Vec2(1.3, 0.0)}, Vec2(x + 8.0, 0.0)});
  }
  for (int k = 0; k < 2; ++k) {
    const double x = 6.0 + 1.5 * k + jitter(rng);
    s.agents.push_back({id++, AgentState{Vec2(x, 1.2 + jitter(rng)), Vec2(-1.3, 0.0)}, Vec2(x - 8.0, 1.2)});
  }
  return s;
}

SynthSpec random_scene_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SynthSpec s;
  s.scene_id = "random_" + std::to_string(seed);
  s.seed = seed;
  s.duration = 4.0;
  s.dt = 0.1;
  const int groups = 2 + static_cast<int>(u(rng) * 3.0);
  for (int g = 0; g < groups; ++g) {
    SynthGroup grp;
    grp.count = 1 + static_cast<int>(u(rng) * 3.0);
    const Vec2 origin(u(rng) * 20.0 - 10.0, u(rng) * 20.0 - 10.0);
    grp.box_min = origin;
    grp.box_max = origin + Vec2(1.5, 1.5);
    const double heading = u(rng) * 2.0 * 3.14159265358979;
    const double reach = 10.0 + u(rng) * 10.0;
    grp.goal = origin + Vec2(0.75, 0.75) + reach * Vec2(std::cos(heading), std::sin(heading));
    grp.speed = 0.5 + u(rng);
    s.groups.push_back(grp);
  }
  return s;
}

SynthSpec lambda_fixture_spec() {
  SynthSpec s;
  s.scene_id = "lambda_fixture";
  s.duration = 2.0;
  s.dt = 0.1;
  s.agents = {
      {1, AgentState{Vec2(0.0, 0.0), Vec2::Zero()}, Vec2(-3.0, 0.0)},
      {2, AgentState{Vec2(0.0, 0.5), Vec2::Zero()}, Vec2(3.0, 0.5)},
  };
  return s;
}

std::vector<std::string_view> preset_names() { return {"overtaking", "opposing", "random", "lambda"}; }

SynthSpec preset_spec(std::string_view name, std::uint64_t seed) {
  if (name == "overtaking") return overtaking_spec();
  if (name == "opposing") return opposing_flow_spec(seed);
  if (name == "random") return random_scene_spec(seed);
  if (name == "lambda") return lambda_fixture_spec();
  throw std::invalid_argument("unknown preset: " + std::string(name));
}

Config lambda_fixture_config() {
  Config cfg;
  cfg.c_tol = 3.0;
  return cfg;
}

}  // namespace swarm
