#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarm/model.hpp"

namespace swarm {

struct Observation {
  Vec2 p = Vec2::Zero();
  std::optional<Vec2> v;
};

using Frame = std::map<AgentId, Observation>;

// Time-indexed ground truth of one scenario. Frame k is at time k * dt; an
// agent absent from a frame is unobserved there.
struct Scene {
  std::string scene_id;
  double dt = 0.1;
  std::vector<Frame> frames;
  GoalMap goals;

  std::vector<AgentId> agent_ids() const;
  std::optional<AgentState> state_at(std::size_t frame, AgentId id) const;
  // Last frame index at which the agent is present, if any.
  std::optional<std::size_t> last_frame_of(AgentId id) const;
  std::optional<std::size_t> first_frame_of(AgentId id) const;
};

// Fills absent velocities by finite differences over consecutive frames:
// central where both neighbours exist, one-sided otherwise, zero for an agent
// seen in a single isolated frame.
void fill_velocities(Scene& scene);

}  // namespace swarm
